"""Cross-validation notes and full analyst reports.

A report ties the three evidence streams together: structural hazard
prevalence from a snapshot, the historical incident distribution, and
simulated harm runs. The cross-validation notes connect the first two,
pointing out where structure and operational history agree, disagree, or
where structure carries hazards that leave no incident trail at all.

Reports are reproducible: metadata carries a sha256 digest of every input
file and a content digest over the whole document (minus the generation
timestamp), so regenerating from identical inputs yields an identical
digest.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from l2risk import __version__
from l2risk.engine import (
    MITIGATION_LABELS,
    Finding,
    Prioritization,
    classify_roles,
    detect_problematic,
    prioritize,
    role_threshold,
)
from l2risk.incidents import (
    IncidentDistribution,
    distribution,
    parse_incidents,
    render_distribution_text,
)
from l2risk.model import (
    CompressedIncidentType,
    RiskDimension,
    RoleFlag,
    RollupConfig,
)
from l2risk.sim import SimResult, load_scenario, simulate
from l2risk.snapshot import (
    FlagRuleset,
    PrevalenceTable,
    aggregate_prevalence,
    extract_projects,
    load_snapshot,
    render_prevalence_text,
)


@dataclass(frozen=True)
class CrossNote:
    """One observation linking structural prevalence to incident history."""

    key: str
    text: str
    dimensions: tuple[RiskDimension, ...]
    incident_types: tuple[CompressedIncidentType, ...]

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "text": self.text,
            "dimensions": [d.value for d in self.dimensions],
            "incident_types": [t.value for t in self.incident_types],
        }


def _pct(value: float | None) -> str:
    return "undefined" if value is None else f"{value}%"


def cross_validate(
    prevalence: PrevalenceTable, dist: IncidentDistribution
) -> tuple[CrossNote, ...]:
    """Line the prevalence table up against the incident distribution.

    Notes fire on the evidence that supports them: incident-linked notes need
    at least one matching incident, while latent-hazard notes depend only on
    structure and survive an empty incident record.
    """
    notes: list[CrossNote] = []
    shares = prevalence.shares
    ishares = dist.shares

    if dist.counts[CompressedIncidentType.SEQUENCER_DISRUPTION] > 0:
        notes.append(
            CrossNote(
                key="sequencer-liveness-gap",
                text=(
                    "Sequencer disruptions account for "
                    f"{_pct(ishares[CompressedIncidentType.SEQUENCER_DISRUPTION])} of classified "
                    f"incidents, yet only {_pct(shares[RiskDimension.SEQUENCER_FAILURE])} of "
                    "projects are flagged for sequencer-failure risk. Listed liveness "
                    "mechanisms are often nominal rather than usable, so structural listings "
                    "and operational history must be read together."
                ),
                dimensions=(RiskDimension.SEQUENCER_FAILURE,),
                incident_types=(CompressedIncidentType.SEQUENCER_DISRUPTION,),
            )
        )
    if dist.counts[CompressedIncidentType.BRIDGE_OR_WITHDRAWAL] > 0:
        notes.append(
            CrossNote(
                key="proposer-withdrawal-linkage",
                text=(
                    f"{_pct(shares[RiskDimension.PROPOSER_FAILURE])} of projects cannot "
                    "progress withdrawals if their whitelisted proposers stall, and bridge or "
                    "withdrawal incidents make up "
                    f"{_pct(ishares[CompressedIncidentType.BRIDGE_OR_WITHDRAWAL])} of the "
                    "record; the structural dependency has a visible operational footprint."
                ),
                dimensions=(RiskDimension.PROPOSER_FAILURE,),
                incident_types=(CompressedIncidentType.BRIDGE_OR_WITHDRAWAL,),
            )
        )
    exit_share = shares[RiskDimension.EXIT_WINDOW]
    if exit_share is not None and exit_share > 0:
        notes.append(
            CrossNote(
                key="exit-window-latent",
                text=(
                    f"{_pct(exit_share)} of projects give users no window to exit before "
                    "upgrades take effect. No incident class maps to this hazard: it stays "
                    "latent until a contentious upgrade or shutdown forces exits, so its "
                    "absence from the incident record is not evidence of safety."
                ),
                dimensions=(RiskDimension.EXIT_WINDOW,),
                incident_types=(),
            )
        )
    sv = shares[RiskDimension.STATE_VALIDATION]
    da = shares[RiskDimension.DATA_AVAILABILITY]
    if (sv is not None and sv > 0) or (da is not None and da > 0):
        notes.append(
            CrossNote(
                key="unobservable-validation-da",
                text=(
                    f"Unenforced state validation ({_pct(sv)} of projects) and offchain data "
                    f"dependence ({_pct(da)}) fail quietly: an accepted invalid root or "
                    "withheld data produces no public outage until funds move. Incident "
                    "feeds systematically under-report these hazards."
                ),
                dimensions=(RiskDimension.STATE_VALIDATION, RiskDimension.DATA_AVAILABILITY),
                incident_types=(),
            )
        )
    return tuple(notes)


@dataclass(frozen=True)
class ReportBundle:
    """A fully assembled report plus the typed pieces it was built from."""

    report: dict
    prevalence: PrevalenceTable
    distribution: IncidentDistribution
    notes: tuple[CrossNote, ...]
    findings: tuple[Finding, ...]
    prioritization: Prioritization
    simulations: tuple[SimResult, ...]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def content_digest(report: dict) -> str:
    """Digest of the report content, ignoring generation time and itself."""
    trimmed = json.loads(json.dumps(report))
    meta = trimmed.get("metadata", {})
    meta.pop("generated_at", None)
    meta.pop("content_digest", None)
    canonical = json.dumps(trimmed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_report(
    *,
    snapshot_path: str | Path,
    incidents_path: str | Path,
    ruleset_path: str | Path | None = None,
    scenario_paths: Sequence[str | Path] = (),
    adapter: str = "auto",
    seed: int = 0,
    config: RollupConfig | None = None,
    threshold: RoleFlag | None = None,
    generated_at: str | None = None,
) -> ReportBundle:
    """Run the whole pipeline over the given inputs and assemble a report."""
    snapshot_path = Path(snapshot_path)
    incidents_path = Path(incidents_path)

    ruleset = FlagRuleset.from_file(ruleset_path) if ruleset_path else None
    extract = extract_projects(load_snapshot(snapshot_path), ruleset=ruleset, adapter=adapter)
    prevalence = aggregate_prevalence(extract.profiles)

    parsed = parse_incidents(incidents_path)
    dist = distribution(parsed.records)

    notes = cross_validate(prevalence, dist)

    cfg = config if config is not None else RollupConfig.centralized_default()
    thr = role_threshold(threshold)
    findings = detect_problematic(classify_roles(cfg), cfg, thr)
    priorities = prioritize(findings, prevalence, dist)

    simulations = []
    for sp in scenario_paths:
        simulations.append(simulate(load_scenario(sp), seed=seed))

    inputs: dict = {
        "snapshot": {"path": str(snapshot_path), "sha256": _sha256(snapshot_path)},
        "incidents": {"path": str(incidents_path), "sha256": _sha256(incidents_path)},
    }
    if ruleset_path:
        inputs["ruleset"] = {"path": str(ruleset_path), "sha256": _sha256(Path(ruleset_path))}
    if scenario_paths:
        inputs["scenarios"] = [
            {"path": str(Path(sp)), "sha256": _sha256(Path(sp))} for sp in scenario_paths
        ]

    stamp = generated_at or dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
    prevalence_section = prevalence.to_dict()
    prevalence_section["warnings"] = list(extract.warnings)
    incidents_section = dist.to_dict()
    incidents_section["warnings"] = list(parsed.warnings)

    report = {
        "metadata": {
            "tool_version": __version__,
            "generated_at": stamp,
            "strict_roles": thr is RoleFlag.INDIRECT,
            "seed": seed,
            "inputs": inputs,
        },
        "prevalence": prevalence_section,
        "incidents": incidents_section,
        "cross_validation": [n.to_dict() for n in notes],
        "findings": [f.to_dict() for f in findings],
        "prioritization": priorities.to_dict(),
        "simulations": [s.summary() for s in simulations],
    }
    report["metadata"]["content_digest"] = content_digest(report)
    return ReportBundle(
        report=report,
        prevalence=prevalence,
        distribution=dist,
        notes=notes,
        findings=findings,
        prioritization=priorities,
        simulations=tuple(simulations),
    )


def _bullets(items: Iterable[str], labels: Mapping[str, str]) -> list[str]:
    return [f"  - {labels.get(item, item)}" for item in items]


def render_report_text(bundle: ReportBundle) -> str:
    """Human-readable rendering of an assembled report."""
    meta = bundle.report["metadata"]
    lines = [
        f"Rollup risk report (tool {meta['tool_version']})",
        f"Generated: {meta['generated_at']}   strict roles: {meta['strict_roles']}",
        f"Content digest: {meta['content_digest']}",
        "",
        render_prevalence_text(bundle.prevalence),
        "",
        render_distribution_text(bundle.distribution),
        "",
        "Cross-validation",
    ]
    for note in bundle.notes:
        lines.append(f"  [{note.key}] {note.text}")
    lines.append("")
    lines.append("Findings (reference deployment)")
    for f in bundle.findings:
        marker = "note" if f.informational else "PROBLEM"
        who = ", ".join(sorted(s.value for s in f.stakeholders))
        lines.append(f"  [{marker}] field {int(f.field)} ({who}): {f.narrative}")
    lines.append("")
    lines.append("Prioritized mitigations")
    lines.append("  Immediate / operational:")
    lines.extend(
        _bullets(bundle.prioritization.immediate_operational, MITIGATION_LABELS)
        or ["  - none indicated by the incident record"]
    )
    lines.append("  Structural / governance:")
    lines.extend(
        _bullets(bundle.prioritization.structural_governance, MITIGATION_LABELS)
        or ["  - none indicated by the prevalence table"]
    )
    if bundle.simulations:
        lines.append("")
        lines.append("Simulations")
        for s in bundle.simulations:
            m = s.metrics
            lines.append(
                f"  {s.scenario}: censorship {m.censorship_window}s, frozen "
                f"{m.frozen_funds_duration}s, conserved {m.funds_conserved}, "
                f"exit coverage {m.exit_coverage_before_upgrade}"
            )
    return "\n".join(lines)
