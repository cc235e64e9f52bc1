import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2risk.data import fixture_path, scenario_names
from l2risk.model import IncidentClass, RollupConfig
from l2risk.sim import (
    Injection,
    InjectionKind,
    RandomWorkload,
    Scenario,
    ScenarioError,
    SimParams,
    WorkloadAction,
    load_bundled_scenario,
    load_scenario,
    next_l1_block,
    parse_scenario,
    simulate,
)

ZK_ONCHAIN = {"proof_system": "zk", "da": {"mode": "onchain"}}


def _scenario(**overrides) -> dict:
    raw = {"config": dict(ZK_ONCHAIN)}
    raw.update(overrides)
    return raw


def _events(result, name):
    return [e for e in result.events if e["event"] == name]


class TestScenarioParsing:
    def test_minimal_document(self):
        sc = parse_scenario(_scenario(), name="bare")
        assert sc.name == "bare"
        assert sc.params == SimParams()
        assert sc.workload(seed=0) == ()

    def test_unknown_top_level_key(self):
        with pytest.raises(ScenarioError, match="unknown scenario keys"):
            parse_scenario(_scenario(extra=1))

    def test_config_required(self):
        with pytest.raises(ScenarioError, match="config"):
            parse_scenario({"workload": {}})

    def test_unknown_injection_kind(self):
        with pytest.raises(ScenarioError):
            parse_scenario(_scenario(injections=[{"kind": "meteor-strike", "at": 0, "duration": 5}]))

    def test_exploit_needs_amount_not_duration(self):
        with pytest.raises(ScenarioError, match="amount"):
            Injection(InjectionKind.EXPLOIT_USER_RISK, at=0)
        with pytest.raises(ScenarioError, match="instantaneous"):
            Injection(InjectionKind.EXPLOIT_USER_RISK, at=0, duration=9, amount=5)

    def test_windowed_injection_needs_duration(self):
        with pytest.raises(ScenarioError, match="duration"):
            Injection(InjectionKind.SEQUENCER_OUTAGE, at=0)

    def test_targets_only_for_censorship(self):
        with pytest.raises(ScenarioError, match="targets"):
            Injection(InjectionKind.SEQUENCER_OUTAGE, at=0, duration=5, targets=("u",))

    def test_workload_exclusive(self):
        with pytest.raises(ScenarioError, match="either explicit or random"):
            parse_scenario(
                _scenario(workload={"actions": [], "random": {"users": 1}})
            )

    def test_action_validation(self):
        with pytest.raises(ScenarioError, match="unknown action"):
            WorkloadAction(0, "steal", "u", 5)
        with pytest.raises(ScenarioError, match="distinct recipient"):
            WorkloadAction(0, "transfer", "u", 5, to="u")
        with pytest.raises(ScenarioError, match="positive amount"):
            WorkloadAction(0, "deposit", "u", 0)
        # hatch-exit amount 0 means "everything"
        WorkloadAction(0, "hatch-exit", "u", 0)

    def test_sim_overrides_and_bad_values(self):
        sc = parse_scenario(_scenario(sim={"prover_latency": 60, "horizon": 1000}))
        assert sc.params.prover_latency == 60
        assert sc.params.horizon == 1000
        with pytest.raises(ScenarioError, match="unknown sim keys"):
            parse_scenario(_scenario(sim={"warp_speed": 1}))
        with pytest.raises(ScenarioError, match="must be an integer"):
            parse_scenario(_scenario(sim={"prover_latency": "fast"}))

    def test_upgrade_needs_announce_at(self):
        with pytest.raises(ScenarioError, match="announce_at"):
            parse_scenario(_scenario(upgrade={}))

    def test_load_scenario_rejects_bad_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json", encoding="utf-8")
        with pytest.raises(ScenarioError, match="not valid JSON"):
            load_scenario(p)

    def test_load_bundled_unknown_name(self):
        with pytest.raises(ScenarioError):
            load_bundled_scenario("no-such-scenario")

    def test_injection_kinds_cover_every_incident_class(self):
        kinds = {k.value for k in InjectionKind}
        assert {c.value for c in IncidentClass} <= kinds
        assert {"da-withholding", "proposer-outage", "prover-outage"} <= kinds


class TestRandomWorkload:
    def test_same_seed_same_actions(self):
        wl = RandomWorkload(users=4, actions=15, horizon=3600)
        assert wl.materialize(7) == wl.materialize(7)
        assert wl.materialize(7) != wl.materialize(8)

    def test_first_action_per_user_is_a_deposit(self):
        wl = RandomWorkload(users=5, actions=40, horizon=86400)
        for seed in range(10):
            first_seen = {}
            for a in wl.materialize(seed):
                first_seen.setdefault(a.user, a.action)
            assert set(first_seen.values()) == {"deposit"}

    def test_bounds(self):
        wl = RandomWorkload(users=3, actions=30, horizon=500, max_amount=9)
        for a in wl.materialize(3):
            assert 0 <= a.at < 500
            assert 1 <= a.amount <= 9


class TestL1Alignment:
    def test_next_l1_block(self):
        assert next_l1_block(0) == 0
        assert next_l1_block(1) == 12
        assert next_l1_block(12) == 12
        assert next_l1_block(13) == 24

    @given(st.integers(min_value=0, max_value=10**9))
    def test_alignment_bounds(self, t):
        b = next_l1_block(t)
        assert t <= b < t + 12
        assert b % 12 == 0


# Metrics pinned from the event arithmetic of each bundled scenario. The
# baseline withdrawal, for example: submit 600, admit 601, batch 720, proof
# ready at 720 + 3600, root final 768 s later, claim at 5088.
BUNDLED_EXPECTATIONS = {
    "zk-withdrawal-baseline": {"lat": {"alice": (4488,)}, "frozen": 0, "cens": 0, "cov": None},
    "sequencer-outage-fi-24h": {"lat": {"alice": (18768,)}, "frozen": 14400, "cens": 14400, "cov": None},
    "sequencer-outage-fi-1h": {"lat": {"alice": (7968,)}, "frozen": 3600, "cens": 3600, "cov": None},
    "instant-upgrade": {"lat": {}, "frozen": 0, "cens": 0, "cov": 0.0},
    "timelocked-upgrade-exit": {
        "lat": {"ana": (4488,), "bo": (4428,), "cy": (4488,)},
        "frozen": 0,
        "cens": 0,
        "cov": 1.0,
    },
    "timelocked-upgrade-blocked": {"lat": {}, "frozen": 0, "cens": 601200, "cov": 0.0},
    "proposer-freeze": {"lat": {"alice": (173328,)}, "frozen": 172440, "cens": 0, "cov": None},
    "exploit-invalid-root": {"lat": {}, "frozen": 0, "cens": 0, "cov": None},
    "escape-hatch-outage": {"lat": {"alice": (768,)}, "frozen": 0, "cens": 0, "cov": None},
}


class TestBundledScenarios:
    def test_every_bundled_scenario_has_expectations(self):
        assert sorted(BUNDLED_EXPECTATIONS) == sorted(
            n.removesuffix(".json") for n in scenario_names()
        )

    @pytest.mark.parametrize("name", sorted(BUNDLED_EXPECTATIONS))
    def test_metrics(self, name):
        result = simulate(load_bundled_scenario(name), seed=0)
        expected = BUNDLED_EXPECTATIONS[name]
        m = result.metrics
        assert dict(m.withdrawal_latency) == expected["lat"]
        assert m.frozen_funds_duration == expected["frozen"]
        assert m.censorship_window == expected["cens"]
        assert m.exit_coverage_before_upgrade == expected["cov"]
        assert m.funds_conserved
        assert result.violations == ()

    @pytest.mark.parametrize("name", sorted(BUNDLED_EXPECTATIONS))
    def test_trace_is_byte_identical_across_runs(self, name):
        sc = load_bundled_scenario(name)
        first = simulate(sc, seed=0).trace_lines()
        second = simulate(sc, seed=0).trace_lines()
        assert first == second
        for line in first:
            json.loads(line)  # every line must be standalone JSON


class TestForcedInclusion:
    @pytest.mark.parametrize("outage", [3600, 43200, 259200])
    @pytest.mark.parametrize("timeout", [3600, 86400])
    def test_inclusion_delay_bounded_by_timeout(self, outage, timeout):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 3607, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
            injections=[{"kind": "sequencer-outage", "at": 3600, "duration": outage}],
        )
        raw["config"]["forced_inclusion"] = {"enabled": True, "timeout": timeout, "usable": True}
        result = simulate(parse_scenario(raw), seed=0)
        queued = _events(result, "tx_queued_forced")[0]
        included = _events(result, "withdrawal_included")[0]
        assert included["t"] - queued["t"] <= timeout + 12

    @settings(max_examples=40, deadline=None)
    @given(
        outage=st.integers(min_value=60, max_value=4 * 86400),
        timeout=st.integers(min_value=60, max_value=2 * 86400),
        submit_offset=st.integers(min_value=0, max_value=600),
    )
    def test_inclusion_bound_property(self, outage, timeout, submit_offset):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 3600 + submit_offset, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
            injections=[{"kind": "sequencer-outage", "at": 3600, "duration": outage}],
        )
        raw["config"]["forced_inclusion"] = {"enabled": True, "timeout": timeout, "usable": True}
        result = simulate(parse_scenario(raw), seed=0)
        queued = _events(result, "tx_queued_forced")
        if not queued:
            return  # submission landed after recovery
        included = _events(result, "withdrawal_included")[0]
        assert included["t"] - queued[0]["t"] <= timeout + 12

    def test_dropped_without_forced_inclusion(self):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 4000, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
            injections=[{"kind": "sequencer-outage", "at": 3600, "duration": 7200}],
        )
        result = simulate(parse_scenario(raw), seed=0)
        assert _events(result, "tx_dropped")
        assert not _events(result, "withdrawal_included")
        # user could not reach the chain until the outage lifted
        assert result.metrics.censorship_window == 3600 + 7200 - 4000


class TestProposerFreeze:
    def test_no_roots_land_during_the_freeze(self):
        result = simulate(load_bundled_scenario("proposer-freeze"), seed=0)
        freeze_end = 172800
        for name in ("proposal", "root_finalized"):
            during = [e for e in _events(result, name) if e["t"] < freeze_end]
            assert during == []
        assert _events(result, "proposal_blocked")
        claimed = _events(result, "withdrawal_claimed")[0]
        assert claimed["t"] > freeze_end

    def test_permissionless_proposers_shrug_it_off(self):
        raw = json.loads(fixture_path("scenarios/proposer-freeze.json").read_text())
        raw["config"]["proposer"] = {"whitelist": False, "count": 4}
        result = simulate(parse_scenario(raw, name="open-proposers"), seed=0)
        assert not _events(result, "proposal_blocked")
        start = _events(result, "injection_start")[0]
        assert "ineffective" in start


class TestExploitAdjudication:
    def _variant(self, **config_overrides):
        raw = json.loads(fixture_path("scenarios/exploit-invalid-root.json").read_text())
        raw["config"].update(config_overrides)
        return raw

    def test_permissionless_challengers_reject_the_root(self):
        result = simulate(load_bundled_scenario("exploit-invalid-root"), seed=0)
        assert _events(result, "root_challenged")
        assert not _events(result, "invalid_root_finalized")
        assert result.metrics.funds_conserved

    def test_unenforced_validation_loses_funds(self):
        raw = self._variant(state_validation_enforced=False)
        result = simulate(parse_scenario(raw, name="v"), seed=0)
        assert _events(result, "invalid_root_finalized")
        drain = _events(result, "exploit_drain")[0]
        assert drain["drained"] == 4000
        assert not result.metrics.funds_conserved
        # the broken bridge identity is expected here, not a bug report
        assert result.violations == ()

    def test_whitelisted_challengers_offline_for_whole_window(self):
        raw = self._variant(prover_set={"count": 1, "permissionless": False})
        raw["injections"].append({"kind": "prover-outage", "at": 7200, "duration": 86424})
        result = simulate(parse_scenario(raw, name="v"), seed=0)
        assert _events(result, "invalid_root_finalized")
        assert not result.metrics.funds_conserved

    def test_whitelisted_challengers_return_mid_window(self):
        raw = self._variant(prover_set={"count": 1, "permissionless": False})
        raw["injections"].append({"kind": "prover-outage", "at": 7200, "duration": 3600})
        result = simulate(parse_scenario(raw, name="v"), seed=0)
        challenged = _events(result, "root_challenged")[0]
        assert challenged["t"] == 10800  # first aligned block after the outage lifts
        assert result.metrics.funds_conserved

    def test_enforced_zk_rejects_at_landing(self):
        raw = self._variant()
        raw["config"] = dict(ZK_ONCHAIN)
        result = simulate(parse_scenario(raw, name="v"), seed=0)
        rejected = _events(result, "root_rejected")[0]
        assert rejected["reason"] == "validity proof required"
        assert result.metrics.funds_conserved


class TestConservation:
    def test_random_workloads_never_leak(self):
        cfg = RollupConfig.from_dict(ZK_ONCHAIN)
        sc = Scenario(
            name="rand",
            config=cfg,
            random_workload=RandomWorkload(users=6, actions=25, horizon=86400),
        )
        for seed in range(50):
            result = simulate(sc, seed=seed)
            assert result.violations == ()
            assert result.metrics.funds_conserved

    def test_random_workloads_with_faults_never_leak(self):
        cfg = RollupConfig.from_dict(
            {
                "proof_system": "zk",
                "forced_inclusion": {"enabled": True, "timeout": 3600, "usable": True},
                "da": {"mode": "onchain"},
            }
        )
        injections = (
            Injection(InjectionKind.SEQUENCER_OUTAGE, at=3600, duration=7200),
            Injection(InjectionKind.BRIDGE_PAUSE_RISK, at=20000, duration=5000),
            Injection(InjectionKind.PROPOSER_OUTAGE, at=40000, duration=10000),
            Injection(InjectionKind.SEQUENCER_PERFORMANCE_DEGRADATION, at=60000, duration=5000),
        )
        sc = Scenario(
            name="rand-faults",
            config=cfg,
            injections=injections,
            random_workload=RandomWorkload(users=6, actions=25, horizon=86400),
        )
        for seed in range(50):
            result = simulate(sc, seed=seed)
            assert result.violations == ()

    def test_overdraft_is_rejected_not_leaked(self):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 100},
                    {"at": 300, "action": "withdraw", "user": "u", "amount": 5000},
                ]
            }
        )
        result = simulate(parse_scenario(raw), seed=0)
        failed = _events(result, "tx_failed")[0]
        assert failed["reason"] == "insufficient funds"
        assert result.metrics.withdrawal_latency == {}
        assert result.violations == ()


class TestFaultWindows:
    def test_targeted_censorship_holds_only_the_target(self):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "mallory-target", "amount": 500},
                    {"at": 0, "action": "deposit", "user": "carol", "amount": 500},
                    {"at": 1200, "action": "withdraw", "user": "mallory-target", "amount": 100},
                    {"at": 1200, "action": "withdraw", "user": "carol", "amount": 100},
                ]
            },
            injections=[
                {
                    "kind": "censorship-forced-inclusion-failure",
                    "at": 1000,
                    "duration": 4000,
                    "targets": ["mallory-target"],
                }
            ],
        )
        raw["config"]["forced_inclusion"] = {"enabled": True, "timeout": 600, "usable": True}
        result = simulate(parse_scenario(raw), seed=0)
        included = {e["user"]: e["t"] for e in _events(result, "withdrawal_included")}
        assert included["carol"] == 1320  # normal grid batch
        assert included["mallory-target"] == 1800  # forced inclusion at timeout
        forced = _events(result, "forced_inclusion")[0]
        assert forced["delay"] <= 600 + 12

    def test_degradation_multiplies_admission_latency(self):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 500, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
            injections=[
                {"kind": "sequencer-performance-degradation", "at": 400, "duration": 1000}
            ],
        )
        result = simulate(parse_scenario(raw), seed=0)
        admitted = _events(result, "tx_admitted")[0]
        assert admitted["t"] == 510  # 1s baseline x factor 10

    def test_bridge_pause_defers_claims_until_it_lifts(self):
        raw = _scenario(
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 120, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
            # covers the claim instant (batch 240 + proof 3600 + finality 768)
            injections=[{"kind": "bridge-pause-risk", "at": 4000, "duration": 2000}],
        )
        result = simulate(parse_scenario(raw), seed=0)
        deferred = _events(result, "claim_deferred")[0]
        claimed = _events(result, "withdrawal_claimed")[0]
        assert deferred["retry_at"] == 6000
        assert claimed["t"] == 6000
        assert result.metrics.frozen_funds_duration > 0

    def test_deposit_rejected_while_bridge_paused(self):
        raw = _scenario(
            workload={"actions": [{"at": 100, "action": "deposit", "user": "u", "amount": 9}]},
            injections=[{"kind": "bridge-halt", "at": 0, "duration": 600}],
        )
        result = simulate(parse_scenario(raw), seed=0)
        rejected = _events(result, "action_rejected")[0]
        assert rejected["reason"] == "bridge unavailable"


class TestEscapeHatch:
    def test_disabled_hatch_rejects(self):
        raw = _scenario(
            workload={"actions": [{"at": 0, "action": "hatch-exit", "user": "u", "amount": 0}]}
        )
        result = simulate(parse_scenario(raw), seed=0)
        assert _events(result, "action_rejected")[0]["reason"] == "escape hatch disabled"

    def test_withheld_data_blocks_the_hatch(self):
        raw = {
            "config": {
                "proof_system": "zk",
                "escape_hatch": {"enabled": True},
                "da": {"mode": "external", "attestation_quorum": 1, "withholding_possible": True},
            },
            "workload": {
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 1000, "action": "hatch-exit", "user": "u", "amount": 0},
                ]
            },
            "injections": [{"kind": "da-withholding", "at": 500, "duration": 5000}],
        }
        result = simulate(parse_scenario(raw, name="withheld"), seed=0)
        assert _events(result, "action_rejected")[0]["reason"] == "data unavailable"

    def test_withholding_is_inert_for_onchain_data(self):
        raw = _scenario(
            injections=[{"kind": "da-withholding", "at": 0, "duration": 100}],
        )
        raw["config"]["escape_hatch"] = {"enabled": True}
        raw["workload"] = {
            "actions": [
                {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                {"at": 50, "action": "hatch-exit", "user": "u", "amount": 0},
            ]
        }
        result = simulate(parse_scenario(raw), seed=0)
        assert "ineffective" in _events(result, "injection_start")[0]
        assert _events(result, "hatch_exit_included")


class TestUpgrades:
    def test_no_holders_means_undefined_coverage(self):
        raw = _scenario(upgrade={"announce_at": 0})
        result = simulate(parse_scenario(raw), seed=0)
        assert result.metrics.exit_coverage_before_upgrade is None

    def test_horizon_truncates_the_run(self):
        raw = _scenario(
            sim={"horizon": 1000},
            workload={
                "actions": [
                    {"at": 0, "action": "deposit", "user": "u", "amount": 500},
                    {"at": 200, "action": "withdraw", "user": "u", "amount": 100},
                ]
            },
        )
        result = simulate(parse_scenario(raw), seed=0)
        assert max(e["t"] for e in result.events) <= 1000
        assert not _events(result, "withdrawal_claimed")
