"""Sweep upgrade-notice windows and measure who actually gets out.

Three holders try to withdraw as soon as an upgrade is announced. Exit
coverage stays at zero until the notice window exceeds the end-to-end
withdrawal latency (admission, batching, proving, finalization depth), then
jumps to one: a timelock shorter than the exit pipeline is notice without
recourse. Run from the repository root:

    python demos/upgrade_exit_window_sweep.py
"""

import dataclasses

from l2risk.model import DAY, HOUR, RollupConfig, UpgradeConfig, UpgradePolicy
from l2risk.sim import Scenario, WorkloadAction, simulate

WINDOWS = (0, 30 * 60, HOUR, 2 * HOUR, 6 * HOUR, DAY, 30 * DAY)
ANNOUNCE_AT = 7200
USERS = ("ana", "bo", "cy")


def coverage_for(window: int) -> float | None:
    if window == 0:
        upgrade = UpgradeConfig(policy=UpgradePolicy.INSTANT)
    else:
        upgrade = UpgradeConfig(policy=UpgradePolicy.TIMELOCKED, window=window)
    config = dataclasses.replace(RollupConfig.centralized_default(), upgrade=upgrade)
    actions = [
        WorkloadAction(at=i * 60, action="deposit", user=u, amount=1000)
        for i, u in enumerate(USERS)
    ]
    # everyone runs for the exit two minutes after the announcement
    actions += [
        WorkloadAction(at=ANNOUNCE_AT + 120 + i * 60, action="withdraw", user=u, amount=1000)
        for i, u in enumerate(USERS)
    ]
    scenario = Scenario(
        name=f"window-{window}s",
        config=config,
        actions=tuple(actions),
        upgrade_at=ANNOUNCE_AT,
    )
    return simulate(scenario).metrics.exit_coverage_before_upgrade


def main() -> None:
    print(f"{'Notice window':>14}  {'Exit coverage':>13}")
    for window in WINDOWS:
        cov = coverage_for(window)
        label = "instant" if window == 0 else f"{window}s"
        shown = "n/a" if cov is None else f"{cov:.2f}"
        print(f"{label:>14}  {shown:>13}")


if __name__ == "__main__":
    main()
