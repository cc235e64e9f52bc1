"""Discrete-event engine for the rollup simulator.

The model, in brief:

- Time is integer seconds. Anything posted to L1 lands at the next block
  boundary at or after the posting instant (``next_l1_block``).
- Users submit transactions to the sequencer. Admitted transactions wait in
  the mempool and are committed in batches on a fixed grid. While the
  sequencer is unavailable (outage, halt, downtime, or targeted censorship)
  a submission either enters the forced-inclusion queue, when that mechanism
  is usable, or is dropped.
- A forced-queue entry is included at the earlier of two moments: the
  sequencer's next batch (the queue is drained first, immediately on
  recovery) or direct L1 inclusion once the forced-inclusion timeout
  elapses. The timeout path bounds inclusion delay by timeout plus one L1
  block regardless of how long the outage lasts.
- Every landed batch gets a state root: proposable after proposal_delay,
  plus proof generation time on validity-proof systems. Roots finalize after
  finalization_depth L1 blocks (validity proofs) or the challenge window
  (fraud proofs). Withdrawals pay out from the bridge once their root is
  final; escape-hatch exits settle directly against finalized L1 state.
- The bridge escrow must always equal the sum of L2 balances and in-flight
  amounts. The identity is re-checked after every event; mismatches are
  recorded, not raised. A finalized invalid state root breaks the identity
  by design and flips funds_conserved.

An invalid state root injected by an attacker finalizes only when state
validation is not enforced, or on a fraud-proof system whose whitelisted
challengers are all offline for the entire challenge window.

Runs are deterministic: with the same scenario and seed the event trace is
byte-identical.
"""

from __future__ import annotations

import heapq
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from l2risk.model import DaMode, HarmMetrics, ProofSystem, UpgradePolicy
from l2risk.sim.scenario import Injection, InjectionKind, Scenario, WorkloadAction


def next_l1_block(t: int, interval: int = 12) -> int:
    """Timestamp of the first L1 block at or after t."""
    return -(-t // interval) * interval


_SEQ_BLOCKING = frozenset(
    {
        InjectionKind.SEQUENCER_OUTAGE,
        InjectionKind.SEQUENCER_HALT,
        InjectionKind.L2_DOWNTIME,
    }
)
_CLAIM_BLOCKING = frozenset(
    {
        InjectionKind.WITHDRAWAL_FAILURE,
        InjectionKind.BRIDGE_PAUSE_RISK,
        InjectionKind.BRIDGE_HALT,
    }
)
_DEPOSIT_BLOCKING = frozenset({InjectionKind.BRIDGE_PAUSE_RISK, InjectionKind.BRIDGE_HALT})

# Same-instant ordering: fault windows close before anything else runs, L1
# landings precede sequencer work, user actions come late, and upgrade
# bookkeeping runs last so it sees the settled state of that second.
_P_END, _P_START, _P_L1, _P_ADMIT, _P_BATCH, _P_ACTION, _P_UPGRADE = range(7)


@dataclass(frozen=True)
class SimResult:
    scenario: str
    seed: int
    metrics: HarmMetrics
    events: tuple[dict, ...]
    violations: tuple[dict, ...]

    def trace_lines(self) -> list[str]:
        """One compact JSON object per event, stable across runs."""
        return [json.dumps(e, sort_keys=True, separators=(",", ":")) for e in self.events]

    def write_trace(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.trace_lines()) + "\n", encoding="utf-8")

    def summary(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "event_count": len(self.events),
            "metrics": self.metrics.to_dict(),
            "conservation_violations": list(self.violations),
        }


class _Run:
    def __init__(self, scenario: Scenario, seed: int) -> None:
        self.sc = scenario
        self.cfg = scenario.config
        self.p = scenario.params
        self.seed = seed
        self.now = 0
        self._heap: list = []
        self._pushes = 0
        self.events: list[dict] = []
        self.violations: list[dict] = []

        self.bridge_pool = 0
        self.l2: dict[str, int] = defaultdict(int)
        # pid -> (user, amount): money that left one ledger but not yet
        # arrived on the other (pending credits, withdrawals, hatch exits)
        self.inflight: dict[str, tuple[str, int]] = {}
        self.mempool: list[dict] = []
        self.forced: list[dict] = []
        self._batch_grid: set[int] = set()
        self._txid = 0

        self.active: dict[int, Injection] = {}
        self.exploit_drained = False
        self.latencies: dict[str, list[int]] = defaultdict(list)
        self.censorship_window = 0
        # exits in flight, tracked for the frozen-funds metric
        self.pending: dict[str, dict] = {}
        self._frozen_accum = 0
        self._frozen_since: int | None = None

        self.exit_denominator: set[str] | None = None
        self.exit_coverage: float | None = None

    # -- plumbing -----------------------------------------------------------

    def _push(self, t: int, prio: int, kind: str, **payload) -> None:
        self._pushes += 1
        heapq.heappush(self._heap, (t, prio, self._pushes, kind, payload))

    def _emit(self, event: str, **fields) -> None:
        entry = {"t": self.now, "i": len(self.events), "event": event}
        entry.update(fields)
        self.events.append(entry)

    def _new_id(self, prefix: str) -> str:
        self._txid += 1
        return f"{prefix}-{self._txid}"

    def execute(self) -> None:
        for action in self.sc.workload(self.seed):
            self._push(action.at, _P_ACTION, "action", action=action)
        for idx, inj in enumerate(self.sc.injections):
            if inj.kind is InjectionKind.EXPLOIT_USER_RISK:
                self._push(inj.at, _P_START, "exploit", idx=idx)
            else:
                self._push(inj.at, _P_START, "injection_start", idx=idx)
                self._push(inj.end, _P_END, "injection_end", idx=idx)
        if self.sc.upgrade_at is not None:
            self._push(self.sc.upgrade_at, _P_UPGRADE, "upgrade_announce")

        horizon = self.p.horizon
        while self._heap:
            t, _prio, _n, kind, payload = heapq.heappop(self._heap)
            if horizon is not None and t > horizon:
                break
            self.now = t
            getattr(self, "_on_" + kind)(**payload)
            self._check_conservation(kind)
            self._update_frozen()
        if self._frozen_since is not None:
            self._frozen_accum += self.now - self._frozen_since
            self._frozen_since = None

    def result(self) -> SimResult:
        metrics = HarmMetrics(
            withdrawal_latency={u: tuple(v) for u, v in self.latencies.items()},
            frozen_funds_duration=self._frozen_accum,
            censorship_window=self.censorship_window,
            exit_coverage_before_upgrade=self.exit_coverage,
            funds_conserved=not self.exploit_drained and not self.violations,
        )
        return SimResult(
            scenario=self.sc.name,
            seed=self.seed,
            metrics=metrics,
            events=tuple(self.events),
            violations=tuple(self.violations),
        )

    # -- fault-window predicates --------------------------------------------

    def _seq_down(self) -> bool:
        return any(inj.kind in _SEQ_BLOCKING for inj in self.active.values())

    def _censored(self, user: str) -> bool:
        return any(
            inj.kind is InjectionKind.CENSORSHIP_FORCED_INCLUSION_FAILURE
            and (not inj.targets or user in inj.targets)
            for inj in self.active.values()
        )

    def _seq_accepting(self, user: str) -> bool:
        return not self._seq_down() and not self._censored(user)

    def _degraded(self) -> bool:
        return any(
            inj.kind is InjectionKind.SEQUENCER_PERFORMANCE_DEGRADATION
            for inj in self.active.values()
        )

    def _proposal_block_ends(self) -> list[int]:
        ends = []
        for inj in self.active.values():
            if inj.kind is InjectionKind.WITHDRAWAL_DELAYS:
                ends.append(inj.end)
            elif inj.kind is InjectionKind.PROPOSER_OUTAGE and self.cfg.proposer.whitelist:
                ends.append(inj.end)
        return ends

    def _provers_permissionless(self) -> bool:
        return self.cfg.prover_set is not None and self.cfg.prover_set.permissionless

    def _proof_block_ends(self) -> list[int]:
        if self._provers_permissionless():
            return []
        return [
            inj.end
            for inj in self.active.values()
            if inj.kind is InjectionKind.PROVER_OUTAGE
        ]

    def _claim_block_ends(self) -> list[int]:
        return [inj.end for inj in self.active.values() if inj.kind in _CLAIM_BLOCKING]

    def _deposits_blocked(self) -> bool:
        return any(inj.kind in _DEPOSIT_BLOCKING for inj in self.active.values())

    def _hatch_blocked(self) -> str | None:
        for inj in self.active.values():
            if inj.kind in _DEPOSIT_BLOCKING:
                return "bridge unavailable"
            if inj.kind is InjectionKind.DA_WITHHOLDING and self.cfg.da.mode is DaMode.EXTERNAL:
                return "data unavailable"
        return None

    def _denial_end(self, user: str) -> int:
        """When the user could next reach the sequencer, given active faults."""
        ends = [self.now]
        for inj in self.active.values():
            if inj.kind in _SEQ_BLOCKING:
                ends.append(inj.end)
            elif inj.kind is InjectionKind.CENSORSHIP_FORCED_INCLUSION_FAILURE and (
                not inj.targets or user in inj.targets
            ):
                ends.append(inj.end)
        return max(ends)

    # -- metric bookkeeping --------------------------------------------------

    def _exit_stalled(self) -> bool:
        zk = self.cfg.proof_system is ProofSystem.ZK
        for p in self.pending.values():
            stage = p["stage"]
            if stage == "queued" and not self._seq_accepting(p["user"]):
                return True
            if stage == "awaiting_root" and (
                self._proposal_block_ends() or (zk and self._proof_block_ends())
            ):
                return True
            if stage == "claimable" and self._claim_block_ends():
                return True
        return False

    def _update_frozen(self) -> None:
        stalled = self._exit_stalled()
        if stalled and self._frozen_since is None:
            self._frozen_since = self.now
        elif not stalled and self._frozen_since is not None:
            self._frozen_accum += self.now - self._frozen_since
            self._frozen_since = None

    def _check_conservation(self, event_kind: str) -> None:
        if self.exploit_drained:
            return
        accounted = sum(self.l2.values()) + sum(a for _, a in self.inflight.values())
        if self.bridge_pool != accounted:
            self.violations.append(
                {
                    "t": self.now,
                    "event": event_kind,
                    "bridge": self.bridge_pool,
                    "accounted": accounted,
                }
            )

    # -- user actions ---------------------------------------------------------

    def _on_action(self, action: WorkloadAction) -> None:
        if action.action == "deposit":
            self._do_deposit(action)
        elif action.action == "hatch-exit":
            self._do_hatch(action)
        else:
            self._do_submit(action)

    def _do_deposit(self, a: WorkloadAction) -> None:
        if self._deposits_blocked():
            self._emit("action_rejected", action="deposit", user=a.user, reason="bridge unavailable")
            return
        pid = self._new_id("dep")
        self._emit("deposit_submitted", id=pid, user=a.user, amount=a.amount)
        land = next_l1_block(self.now, self.p.l1_block_interval)
        self._push(land, _P_L1, "deposit_landed", pid=pid, user=a.user, amount=a.amount)

    def _on_deposit_landed(self, pid: str, user: str, amount: int) -> None:
        self.bridge_pool += amount
        self.inflight[pid] = (user, amount)
        self._emit("deposit_landed", id=pid, user=user, amount=amount)
        credit = {
            "id": pid,
            "type": "credit",
            "user": user,
            "amount": amount,
            "submitted": self.now,
            "denied": False,
        }
        self._enqueue_l2(credit)

    def _do_submit(self, a: WorkloadAction) -> None:
        txid = self._new_id("wd" if a.action == "withdraw" else "tr")
        tx = {
            "id": txid,
            "type": a.action,
            "user": a.user,
            "amount": a.amount,
            "to": a.to,
            "submitted": self.now,
            "denied": False,
        }
        self._emit("tx_submitted", id=txid, type=a.action, user=a.user, amount=a.amount)
        if a.action == "withdraw":
            self.pending[txid] = {
                "user": a.user,
                "amount": a.amount,
                "submitted": self.now,
                "stage": "queued",
            }
        if self._seq_accepting(a.user):
            factor = self.p.degradation_factor if self._degraded() else 1
            self._push(
                self.now + self.p.admission_latency * factor, _P_ADMIT, "tx_admitted", tx=tx
            )
        else:
            tx["denied"] = True
            self._deny(tx)

    def _on_tx_admitted(self, tx: dict) -> None:
        if not self._seq_accepting(tx["user"]):
            # the sequencer went away between submission and admission
            tx["denied"] = True
            self._deny(tx)
            return
        self._emit("tx_admitted", id=tx["id"])
        self.mempool.append(tx)
        self._grid_batch(self.now)

    def _deny(self, tx: dict) -> None:
        if self.cfg.forced_inclusion.usable:
            tx["entry"] = self.now
            self.forced.append(tx)
            deadline = next_l1_block(
                self.now + self.cfg.forced_inclusion.timeout, self.p.l1_block_interval
            )
            self._emit("tx_queued_forced", id=tx["id"], deadline=deadline)
            self._push(deadline, _P_L1, "forced_deadline", txid=tx["id"])
        else:
            self._emit("tx_dropped", id=tx["id"], reason="sequencer unavailable")
            self.pending.pop(tx["id"], None)
            blocked_for = self._denial_end(tx["user"]) - tx["submitted"]
            self.censorship_window = max(self.censorship_window, blocked_for)

    def _do_hatch(self, a: WorkloadAction) -> None:
        if not self.cfg.escape_hatch.enabled:
            self._emit(
                "action_rejected", action="hatch-exit", user=a.user, reason="escape hatch disabled"
            )
            return
        reason = self._hatch_blocked()
        if reason is not None:
            self._emit("action_rejected", action="hatch-exit", user=a.user, reason=reason)
            return
        hid = self._new_id("hx")
        self._emit("hatch_exit_submitted", id=hid, user=a.user)
        land = next_l1_block(self.now, self.p.l1_block_interval)
        self._push(
            land, _P_L1, "hatch_included", hid=hid, user=a.user,
            requested=a.amount, submitted=self.now,
        )

    def _on_hatch_included(self, hid: str, user: str, requested: int, submitted: int) -> None:
        balance = self.l2[user]
        amount = balance if requested == 0 else min(requested, balance)
        if amount <= 0:
            self._emit("tx_failed", id=hid, user=user, reason="nothing to exit")
            return
        self.l2[user] -= amount
        self.inflight[hid] = (user, amount)
        self.pending[hid] = {
            "user": user,
            "amount": amount,
            "submitted": submitted,
            "stage": "hatch_wait",
        }
        self._emit("hatch_exit_included", id=hid, user=user, amount=amount)
        done = self.now + self.p.finalization_depth * self.p.l1_block_interval
        self._push(done, _P_L1, "claim", wid=hid)

    # -- sequencing and batches ------------------------------------------------

    def _enqueue_l2(self, tx: dict) -> None:
        """Route a system transaction (deposit credit) toward L2 inclusion."""
        if self._seq_accepting(tx["user"]):
            self.mempool.append(tx)
            self._grid_batch(self.now)
        elif self.cfg.forced_inclusion.usable:
            tx["entry"] = self.now
            self.forced.append(tx)
            deadline = next_l1_block(
                self.now + self.cfg.forced_inclusion.timeout, self.p.l1_block_interval
            )
            self._push(deadline, _P_L1, "forced_deadline", txid=tx["id"])
        else:
            # parked until the sequencer recovers; drained by the recovery batch
            self.mempool.append(tx)

    def _grid_batch(self, t: int) -> None:
        bi = self.p.batch_interval
        bt = -(-t // bi) * bi
        if bt not in self._batch_grid:
            self._batch_grid.add(bt)
            self._push(bt, _P_BATCH, "batch_tick")

    def _on_batch_tick(self) -> None:
        if self._seq_down():
            return
        self._make_batch()

    def _on_recovery_batch(self) -> None:
        if self._seq_down():
            return
        self._make_batch()

    def _make_batch(self) -> None:
        taken, kept = [], []
        for tx in self.forced:
            (kept if self._censored(tx["user"]) else taken).append(tx)
        txs = taken + self.mempool
        self.forced = kept
        self.mempool = []
        if not txs:
            return
        land = next_l1_block(self.now, self.p.l1_block_interval)
        self._emit("batch_created", size=len(txs), lands_at=land)
        self._push(land, _P_L1, "batch_landed", txs=txs)

    def _on_batch_landed(self, txs: list[dict]) -> None:
        self._emit("batch_landed", size=len(txs))
        wids = []
        for tx in txs:
            wid = self._apply_tx(tx)
            if wid is not None:
                wids.append(wid)
        self._schedule_proposal(self.now, wids)

    def _on_forced_deadline(self, txid: str) -> None:
        for i, tx in enumerate(self.forced):
            if tx["id"] == txid:
                break
        else:
            return  # already included by a batch
        tx = self.forced.pop(i)
        self._emit("forced_inclusion", id=txid, delay=self.now - tx["entry"])
        wid = self._apply_tx(tx)
        self._schedule_proposal(self.now, [wid] if wid is not None else [])

    def _apply_tx(self, tx: dict) -> str | None:
        """Apply one included transaction; returns the id of a successfully
        included withdrawal, else None."""
        if tx["denied"]:
            self.censorship_window = max(self.censorship_window, self.now - tx["submitted"])
        user, amount = tx["user"], tx["amount"]
        if tx["type"] == "credit":
            self.inflight.pop(tx["id"])
            self.l2[user] += amount
            self._emit("credit_applied", id=tx["id"], user=user, amount=amount)
            return None
        if tx["type"] == "transfer":
            if self.l2[user] < amount:
                self._emit("tx_failed", id=tx["id"], user=user, reason="insufficient funds")
                return None
            self.l2[user] -= amount
            self.l2[tx["to"]] += amount
            self._emit("transfer_applied", id=tx["id"], user=user, to=tx["to"], amount=amount)
            return None
        if self.l2[user] < amount:
            self._emit("tx_failed", id=tx["id"], user=user, reason="insufficient funds")
            self.pending.pop(tx["id"], None)
            return None
        self.l2[user] -= amount
        self.inflight[tx["id"]] = (user, amount)
        self.pending[tx["id"]]["stage"] = "awaiting_root"
        self._emit("withdrawal_included", id=tx["id"], user=user, amount=amount)
        return tx["id"]

    # -- state roots and claims -------------------------------------------------

    def _schedule_proposal(self, batch_time: int, wids: list[str]) -> None:
        ready = batch_time + self.p.proposal_delay
        if self.cfg.proof_system is ProofSystem.ZK:
            ready = max(ready, batch_time + self.p.prover_latency)
        at = next_l1_block(ready, self.p.l1_block_interval)
        self._push(at, _P_L1, "proposal_attempt", batch_time=batch_time, wids=wids)

    def _on_proposal_attempt(self, batch_time: int, wids: list[str]) -> None:
        blocked_until = self._proposal_block_ends()
        if self.cfg.proof_system is ProofSystem.ZK:
            blocked_until += self._proof_block_ends()
        if blocked_until:
            retry = next_l1_block(max(blocked_until), self.p.l1_block_interval)
            self._emit("proposal_blocked", batch_time=batch_time, retry_at=retry)
            self._push(retry, _P_L1, "proposal_attempt", batch_time=batch_time, wids=wids)
            return
        self._emit("proposal", batch_time=batch_time, withdrawals=len(wids))
        if self.cfg.proof_system is ProofSystem.ZK:
            final = self.now + self.p.finalization_depth * self.p.l1_block_interval
        else:
            final = self.now + self.cfg.challenge_window
        self._push(final, _P_L1, "root_finalized", batch_time=batch_time, wids=wids)

    def _on_root_finalized(self, batch_time: int, wids: list[str]) -> None:
        self._emit("root_finalized", batch_time=batch_time, withdrawals=len(wids))
        for wid in wids:
            if wid in self.pending:
                self.pending[wid]["stage"] = "claimable"
                self._push(self.now, _P_L1, "claim", wid=wid)

    def _on_claim(self, wid: str) -> None:
        if wid not in self.pending:
            return
        ends = self._claim_block_ends()
        if ends:
            self.pending[wid]["stage"] = "claimable"
            retry = max(ends)
            self._emit("claim_deferred", id=wid, retry_at=retry)
            self._push(retry, _P_L1, "claim", wid=wid)
            return
        user, amount = self.inflight.pop(wid)
        self.bridge_pool -= amount
        p = self.pending.pop(wid)
        latency = self.now - p["submitted"]
        self.latencies[user].append(latency)
        self._emit("withdrawal_claimed", id=wid, user=user, amount=amount, latency=latency)

    # -- fault windows, exploits, upgrades ----------------------------------------

    def _on_injection_start(self, idx: int) -> None:
        inj = self.sc.injections[idx]
        self.active[idx] = inj
        fields = {"kind": inj.kind.value, "until": inj.end}
        if inj.kind is InjectionKind.DA_WITHHOLDING and self.cfg.da.mode is DaMode.ONCHAIN:
            fields["ineffective"] = "onchain data cannot be withheld"
        if inj.kind is InjectionKind.PROPOSER_OUTAGE and not self.cfg.proposer.whitelist:
            fields["ineffective"] = "permissionless proposers route around a stalled operator"
        if inj.kind is InjectionKind.PROVER_OUTAGE and self._provers_permissionless():
            fields["ineffective"] = "permissionless provers route around a stalled operator"
        self._emit("injection_start", **fields)

    def _on_injection_end(self, idx: int) -> None:
        inj = self.active.pop(idx)
        self._emit("injection_end", kind=inj.kind.value)
        if inj.kind in _SEQ_BLOCKING or inj.kind is InjectionKind.CENSORSHIP_FORCED_INCLUSION_FAILURE:
            if (self.mempool or self.forced) and not self._seq_down():
                self._push(self.now, _P_BATCH, "recovery_batch")

    def _on_exploit(self, idx: int) -> None:
        inj = self.sc.injections[idx]
        self._emit("exploit_attempted", amount=inj.amount)
        land = next_l1_block(self.now, self.p.l1_block_interval)
        self._push(land, _P_L1, "invalid_root_landed", idx=idx)

    def _on_invalid_root_landed(self, idx: int) -> None:
        inj = self.sc.injections[idx]
        self._emit("invalid_root_landed", amount=inj.amount)
        optimistic = self.cfg.proof_system is ProofSystem.OPTIMISTIC
        if self.cfg.state_validation_enforced and not optimistic:
            self._emit("root_rejected", reason="validity proof required")
            return
        if self.cfg.state_validation_enforced:
            deadline = self.now + self.cfg.challenge_window
            challenge_at = self._first_challenge_opportunity(self.now, deadline)
            if challenge_at is not None:
                self._push(challenge_at, _P_L1, "root_challenged", idx=idx)
                return
            self._push(deadline, _P_L1, "invalid_root_finalized", idx=idx)
            return
        # no enforced validation: nothing stands between the root and finality
        if optimistic:
            final = self.now + self.cfg.challenge_window
        else:
            final = self.now + self.p.finalization_depth * self.p.l1_block_interval
        self._push(final, _P_L1, "invalid_root_finalized", idx=idx)

    def _first_challenge_opportunity(self, landed: int, deadline: int) -> int | None:
        """Earliest aligned instant in (landed, deadline) at which someone can
        submit a fraud proof, or None if whitelisted challengers are offline
        for the whole window."""
        interval = self.p.l1_block_interval
        candidate = landed + interval
        if self._provers_permissionless():
            candidate = next_l1_block(candidate, interval)
            return candidate if candidate < deadline else None
        windows = sorted(
            (inj.at, inj.end)
            for inj in self.sc.injections
            if inj.kind is InjectionKind.PROVER_OUTAGE
        )
        while True:
            moved = candidate
            for start, end in windows:
                if start <= moved < end:
                    moved = end
            moved = next_l1_block(moved, interval)
            if moved == candidate:
                return candidate if candidate < deadline else None
            candidate = moved

    def _on_root_challenged(self, idx: int) -> None:
        inj = self.sc.injections[idx]
        self._emit("root_challenged", amount=inj.amount)

    def _on_invalid_root_finalized(self, idx: int) -> None:
        inj = self.sc.injections[idx]
        drained = min(inj.amount, self.bridge_pool)
        self.bridge_pool -= drained
        self.exploit_drained = True
        self._emit("invalid_root_finalized", amount=inj.amount)
        self._emit("exploit_drain", drained=drained, bridge_left=self.bridge_pool)

    def _on_upgrade_announce(self) -> None:
        holders = {u for u, b in self.l2.items() if b > 0}
        holders |= {u for u, a in self.inflight.values() if a > 0}
        self.exit_denominator = holders
        if self.cfg.upgrade.policy is UpgradePolicy.TIMELOCKED:
            activation = self.now + self.cfg.upgrade.window
        else:
            activation = self.now
        self._emit("upgrade_announced", activation=activation, holders=sorted(holders))
        self._push(activation, _P_UPGRADE, "upgrade_activated")

    def _on_upgrade_activated(self) -> None:
        if self.exit_denominator:
            still_in = {u for u, b in self.l2.items() if b > 0}
            still_in |= {u for u, a in self.inflight.values() if a > 0}
            exited = {u for u in self.exit_denominator if u not in still_in}
            self.exit_coverage = len(exited) / len(self.exit_denominator)
        else:
            self.exit_coverage = None
        self._emit("upgrade_activated", exit_coverage=self.exit_coverage)


def simulate(scenario: Scenario, seed: int = 0) -> SimResult:
    """Run a scenario to quiescence and summarize the harm it caused."""
    run = _Run(scenario, seed)
    run.execute()
    return run.result()
