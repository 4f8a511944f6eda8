"""Severity-aware local group bias detection."""

from ._slogan import (
    AuditReport,
    BiasThresholds,
    ClusteringResult,
    Cohort,
    GridSearchResult,
    ParseError,
    SloganError,
    ValidationError,
    audit,
    bootstrap_thresholds,
    fit,
    generate_synthetic,
    grid_search,
    load_cohort,
    recall_score,
    run_cli,
    save_cohort,
)

__all__ = [
    "AuditReport",
    "BiasThresholds",
    "ClusteringResult",
    "Cohort",
    "GridSearchResult",
    "ParseError",
    "SloganError",
    "ValidationError",
    "audit",
    "bootstrap_thresholds",
    "fit",
    "generate_synthetic",
    "grid_search",
    "load_cohort",
    "recall_score",
    "run_cli",
    "save_cohort",
]
