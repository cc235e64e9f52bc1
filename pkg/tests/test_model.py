import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from l2risk.model import (
    DaConfig,
    DaMode,
    EraField,
    FIELD_FLAGS,
    FIELD_TABLE,
    ForcedInclusionConfig,
    HarmMetrics,
    IncidentClass,
    CompressedIncidentType,
    ProjectCategory,
    ProjectRiskProfile,
    ProofSystem,
    RiskDimension,
    RiskEntry,
    RoleAssignment,
    RoleFlag,
    RoleMatrix,
    RollupConfig,
    Sentiment,
    SourceKind,
    Stakeholder,
    UpgradeConfig,
    UpgradePolicy,
    binarize,
    normalize_label,
    percentage,
)

ALL_ENUMS = [
    ProjectCategory,
    RiskDimension,
    Sentiment,
    IncidentClass,
    CompressedIncidentType,
    SourceKind,
    Stakeholder,
    RoleFlag,
    ProofSystem,
    DaMode,
    UpgradePolicy,
]


class TestEnums:
    def test_parse_print_round_trip(self):
        for enum_cls in ALL_ENUMS:
            for member in enum_cls:
                assert enum_cls.parse(member.value) is member

    def test_parse_is_tolerant_of_case_and_whitespace(self):
        assert RiskDimension.parse(" Sequencer Failure ") is RiskDimension.SEQUENCER_FAILURE
        assert ProjectCategory.parse("ZK Rollup") is ProjectCategory.ZK_ROLLUP
        assert ProjectCategory.parse("Optimistic Rollup") is ProjectCategory.OPTIMISTIC_ROLLUP

    def test_parse_rejects_unknown(self):
        with pytest.raises(ValueError):
            RiskDimension.parse("state derivation")

    def test_member_counts(self):
        assert len(RiskDimension) == 5
        assert len(IncidentClass) == 10
        assert len(CompressedIncidentType) == 4
        assert len(Stakeholder) == 10

    def test_role_flag_parses_slash_cells_to_stronger_component(self):
        assert RoleFlag.parse("indirect/no") is RoleFlag.INDIRECT
        assert RoleFlag.parse("limited/no") is RoleFlag.LIMITED
        assert RoleFlag.parse("yes") is RoleFlag.YES


class TestBinarize:
    def test_default_threshold_only_accepts_yes(self):
        assert binarize(RoleFlag.YES, RoleFlag.YES) is True
        assert binarize(RoleFlag.NO, RoleFlag.YES) is False
        assert binarize(RoleFlag.INDIRECT, RoleFlag.YES) is False
        assert binarize(RoleFlag.LIMITED, RoleFlag.YES) is False

    def test_indirect_threshold_excludes_limited(self):
        assert binarize(RoleFlag.INDIRECT, RoleFlag.INDIRECT) is True
        assert binarize(RoleFlag.LIMITED, RoleFlag.INDIRECT) is False

    def test_ordinal_scale(self):
        ranks = [RoleFlag.NO.rank, RoleFlag.LIMITED.rank, RoleFlag.INDIRECT.rank, RoleFlag.YES.rank]
        assert ranks == sorted(ranks)
        assert len(set(ranks)) == 4


class TestFieldTable:
    def test_bijection_covers_exactly_the_seven_nonempty_triples(self):
        triples = [t for t in itertools.product([False, True], repeat=3) if any(t)]
        assert sorted(FIELD_TABLE) == sorted(triples)
        assert sorted(FIELD_TABLE.values()) == sorted(EraField)
        assert (False, False, False) not in FIELD_TABLE

    def test_inverse_agrees(self):
        for flags, field in FIELD_TABLE.items():
            assert FIELD_FLAGS[field] == flags

    def test_anchor_fields(self):
        assert FIELD_TABLE[(False, True, True)] is EraField.BENEFIT_AND_DECISION
        assert FIELD_TABLE[(True, False, False)] is EraField.EXPOSURE_ONLY
        assert FIELD_TABLE[(False, True, False)] is EraField.BENEFIT_ONLY
        assert FIELD_TABLE[(True, True, False)] is EraField.EXPOSURE_AND_BENEFIT


class TestRiskEntry:
    def test_value_and_description_are_normalized(self):
        e = RiskEntry(
            dimension=RiskDimension.EXIT_WINDOW,
            value="  None ",
            sentiment=Sentiment.BAD,
            description="  Instantly   UPGRADABLE  ",
        )
        assert e.value == "none"
        assert e.description == "instantly upgradable"

    @given(st.text(max_size=60))
    def test_normalization_is_idempotent(self, raw):
        once = normalize_label(raw)
        assert normalize_label(once) == once

    def test_unknown_dimension_entries_cannot_be_flagged(self):
        with pytest.raises(ValueError):
            RiskEntry(None, "x", Sentiment.BAD, "y", flagged=True)


class TestProjectRiskProfile:
    def _entry(self, dim):
        return RiskEntry(dim, "v", Sentiment.NEUTRAL, "d")

    def test_rejects_duplicate_dimensions(self):
        with pytest.raises(ValueError):
            ProjectRiskProfile(
                "p1",
                "P1",
                ProjectCategory.OTHER,
                (self._entry(RiskDimension.EXIT_WINDOW), self._entry(RiskDimension.EXIT_WINDOW)),
            )

    def test_rejects_unrecognized_dimension_entries(self):
        with pytest.raises(ValueError):
            ProjectRiskProfile(
                "p1", "P1", ProjectCategory.OTHER, (RiskEntry(None, "v", Sentiment.UNKNOWN, "d"),)
            )

    def test_rejects_empty_id(self):
        with pytest.raises(ValueError):
            ProjectRiskProfile("", "P1", ProjectCategory.OTHER, ())

    def test_entry_lookup(self):
        p = ProjectRiskProfile(
            "p1", "P1", ProjectCategory.ZK_ROLLUP, (self._entry(RiskDimension.EXIT_WINDOW),)
        )
        assert p.entry(RiskDimension.EXIT_WINDOW) is p.risks[0]
        assert p.entry(RiskDimension.DATA_AVAILABILITY) is None


class TestRoleMatrix:
    def test_rejects_missing_stakeholder(self):
        rows = {
            s: RoleAssignment(RoleFlag.NO, RoleFlag.NO, RoleFlag.YES)
            for s in Stakeholder
            if s is not Stakeholder.SEQUENCER
        }
        with pytest.raises(ValueError):
            RoleMatrix(rows)

    def test_total_matrix_accepted_and_immutable(self):
        rows = {s: RoleAssignment(RoleFlag.YES, RoleFlag.YES, RoleFlag.NO) for s in Stakeholder}
        m = RoleMatrix(rows)
        assert m[Stakeholder.END_USER].risk_exposed is RoleFlag.YES
        with pytest.raises(TypeError):
            m.rows[Stakeholder.END_USER] = RoleAssignment(RoleFlag.NO, RoleFlag.NO, RoleFlag.NO)


class TestRollupConfigValidation:
    def test_optimistic_requires_challenge_window(self):
        with pytest.raises(ValueError):
            RollupConfig(proof_system=ProofSystem.OPTIMISTIC, challenge_window=0)

    def test_forced_inclusion_usable_implies_enabled(self):
        with pytest.raises(ValueError):
            ForcedInclusionConfig(enabled=False, usable=True)

    def test_timelocked_upgrade_needs_positive_window(self):
        with pytest.raises(ValueError):
            UpgradeConfig(policy=UpgradePolicy.TIMELOCKED, window=0)

    def test_onchain_da_cannot_be_withheld(self):
        with pytest.raises(ValueError):
            DaConfig(mode=DaMode.ONCHAIN, withholding_possible=True)

    def test_dict_round_trip(self):
        cfg = RollupConfig.centralized_default()
        assert RollupConfig.from_dict(cfg.to_dict()) == cfg

    def test_default_config_has_independent_provers(self):
        assert RollupConfig.centralized_default().has_independent_provers()


class TestPercentage:
    def test_rounds_ties_up(self):
        assert percentage(6, 32) == 18.8  # 18.75 is an exact tie
        assert percentage(1, 16) == 6.3  # 6.25 is an exact tie
        assert percentage(1, 8) == 12.5

    def test_rejects_nonpositive_total(self):
        with pytest.raises(ValueError):
            percentage(1, 0)

    @given(st.integers(min_value=0, max_value=500), st.integers(min_value=1, max_value=500))
    def test_within_rounding_distance_of_exact_share(self, count, total):
        assert abs(percentage(count, total) - 100 * count / total) <= 0.05 + 1e-9


def test_harm_metrics_serialization_is_sorted_and_plain():
    m = HarmMetrics(
        withdrawal_latency={"u2": (5,), "u1": (3, 4)},
        frozen_funds_duration=7,
        censorship_window=0,
        exit_coverage_before_upgrade=None,
        funds_conserved=True,
    )
    d = m.to_dict()
    assert list(d["withdrawal_latency"]) == ["u1", "u2"]
    assert d["withdrawal_latency"]["u1"] == [3, 4]
    assert d["exit_coverage_before_upgrade"] is None
