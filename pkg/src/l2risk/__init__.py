"""Analyst toolkit for stakeholder-centred risk analysis of Layer-2 rollups."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CompressedIncidentType,
    EraField,
    HarmMetrics,
    IncidentClass,
    IncidentRecord,
    ProjectCategory,
    ProjectRiskProfile,
    RiskDimension,
    RiskEntry,
    RoleAssignment,
    RoleFlag,
    RoleMatrix,
    RollupConfig,
    Sentiment,
    SourceKind,
    Stakeholder,
    binarize,
)
