"""
Fit quality metrics.

Error: 1 - mean over the three parameters of the single-sample accuracy
1 - |est - true| / R (unitless). Cost: mean squared frequency discrepancy
between the model at the fitted parameters and a labeled reference (GHz^2).
"""

from dataclasses import dataclass

import numpy as np

from .. import config
from ..core.params import ParamRanges, QubitParams
from ..model.metrics import accuracy
from ..sim.points import SpectrumPointSet
from .least_squares import residuals


@dataclass(frozen=True)
class MetricReport:
    error: float
    cost: float
    n_points: int

    @property
    def rms_mhz(self) -> float:
        return 1000.0 * float(np.sqrt(self.cost))

    def to_dict(self) -> dict:
        return {"error": self.error, "cost": self.cost, "n_points": self.n_points}


def error_metric(est: QubitParams, truth: QubitParams, ranges: ParamRanges = None) -> float:
    return 1.0 - accuracy([est], [truth], ranges).mean_acc


def cost_metric(
    params: QubitParams,
    reference: SpectrumPointSet,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> float:
    """Mean of (f_model - f_reference)^2 over the labeled reference points."""
    r = residuals(reference, params, basis_dim)
    return float(np.mean(r * r))


def log_cost(cost: float) -> float:
    """log10(Cost) floored so that an exact fit maps to the floor."""
    if cost <= 0.0:
        return config.LOG_COST_FLOOR
    return max(float(np.log10(cost)), config.LOG_COST_FLOOR)


def metric_report(
    est: QubitParams,
    truth: QubitParams,
    reference: SpectrumPointSet,
    ranges: ParamRanges = None,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> MetricReport:
    return MetricReport(
        error=error_metric(est, truth, ranges),
        cost=cost_metric(est, reference, basis_dim),
        n_points=len(reference),
    )
