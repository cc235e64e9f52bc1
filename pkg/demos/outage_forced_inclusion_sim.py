"""Sweep sequencer outages against forced-inclusion timeouts.

A user submits a withdrawal while the sequencer is down. With a usable
forced-inclusion path the transaction always lands within one L1 block of
the timeout, no matter how long the outage drags on; without one the user
simply waits out the whole outage. Run from the repository root:

    python demos/outage_forced_inclusion_sim.py
"""

import dataclasses

from l2risk.model import DAY, HOUR, ForcedInclusionConfig, RollupConfig
from l2risk.sim import Injection, InjectionKind, Scenario, WorkloadAction, simulate

OUTAGES = (HOUR, 12 * HOUR, 3 * DAY)
TIMEOUTS = (HOUR, 24 * HOUR)
OUTAGE_START = 600


def run_once(outage: int, fi: ForcedInclusionConfig) -> int:
    config = dataclasses.replace(RollupConfig.centralized_default(), forced_inclusion=fi)
    scenario = Scenario(
        name=f"outage-{outage}s",
        config=config,
        actions=(
            WorkloadAction(at=0, action="deposit", user="u", amount=1000),
            WorkloadAction(at=OUTAGE_START + 100, action="withdraw", user="u", amount=500),
        ),
        injections=(
            Injection(kind=InjectionKind.SEQUENCER_OUTAGE, at=OUTAGE_START, duration=outage),
        ),
    )
    return simulate(scenario).metrics.censorship_window


def hms(seconds: int) -> str:
    h, rem = divmod(seconds, 3600)
    m, s = divmod(rem, 60)
    return f"{h:d}:{m:02d}:{s:02d}"


def main() -> None:
    print(f"{'Outage':>10}  {'FI timeout':>10}  {'Inclusion delay':>15}  {'Bound (timeout+12)':>18}")
    for outage in OUTAGES:
        for timeout in TIMEOUTS:
            fi = ForcedInclusionConfig(enabled=True, timeout=timeout, usable=True)
            delay = run_once(outage, fi)
            bound = timeout + 12
            mark = "ok" if delay <= bound else "EXCEEDED"
            print(f"{hms(outage):>10}  {hms(timeout):>10}  {hms(delay):>15}  {hms(bound):>15} {mark}")

    # Same submission with no inclusion path at all: the delay tracks the
    # outage, not any timeout the user could rely on.
    print()
    for outage in OUTAGES:
        delay = run_once(outage, ForcedInclusionConfig())
        print(f"no forced inclusion, {hms(outage)} outage -> user waits {hms(delay)}")


if __name__ == "__main__":
    main()
