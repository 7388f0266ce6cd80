"""Least-squares refinement, Error/Cost metrics and initial-guess studies."""

from .least_squares import (
    FitConfig,
    FitResult,
    SpectrumResiduals,
    default_bounds,
    fit,
    numeric_jacobian,
    residuals,
)
from .metrics import MetricReport, cost_metric, error_metric, log_cost, metric_report
from .harness import (
    ArmStats,
    CaseRecord,
    ComparisonTable,
    ContourData,
    HarnessConfig,
    InitOutcome,
    compare_random_vs_ml,
    evaluate_inits,
    ml_input_grid,
    init_rng,
    random_inits,
    reference_spectrum,
    scan_initial_grid,
)

__all__ = [
    "FitConfig", "FitResult", "SpectrumResiduals", "default_bounds", "fit",
    "numeric_jacobian", "residuals",
    "MetricReport", "cost_metric", "error_metric", "log_cost", "metric_report",
    "ArmStats", "CaseRecord", "ComparisonTable", "ContourData", "HarnessConfig", "InitOutcome",
    "compare_random_vs_ml", "evaluate_inits", "ml_input_grid", "init_rng", "random_inits",
    "reference_spectrum", "scan_initial_grid",
]
