"""
Regression accuracy: per-axis mean of 1 - |pred - true| / R, where R is the
span of each parameter range.
"""

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from ..core.params import ParamRanges, QubitParams
from ..data.storage import DatasetEntry
from ..errors import ShapeError
from .predict import predict
from .training import TrainedModel


@dataclass
class AccReport:
    acc_e_c: float
    acc_e_l: float
    acc_e_j: float
    mean_acc: float
    n_test: int
    ranges_used: ParamRanges
    per_sample: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "acc_e_c": self.acc_e_c,
            "acc_e_l": self.acc_e_l,
            "acc_e_j": self.acc_e_j,
            "mean_acc": self.mean_acc,
            "n_test": self.n_test,
            "ranges_used": self.ranges_used.model_dump(mode="json"),
        }


def per_axis_accuracy(preds: np.ndarray, truths: np.ndarray, ranges: ParamRanges) -> np.ndarray:
    """(N, 3) array of single-sample accuracies."""
    return 1.0 - np.abs(preds - truths) / ranges.spans


def accuracy(
    preds: Sequence[QubitParams],
    truths: Sequence[QubitParams],
    ranges: ParamRanges = None,
) -> AccReport:
    if len(preds) != len(truths):
        raise ShapeError(f"{len(preds)} predictions vs {len(truths)} truths")
    if not preds:
        raise ShapeError("accuracy needs at least one sample")
    ranges = ranges or ParamRanges()
    acc = per_axis_accuracy(
        np.stack([p.as_array() for p in preds]), np.stack([t.as_array() for t in truths]), ranges
    )
    acc_e_c, acc_e_l, acc_e_j = (float(v) for v in acc.mean(axis=0))
    return AccReport(
        acc_e_c=acc_e_c,
        acc_e_l=acc_e_l,
        acc_e_j=acc_e_j,
        mean_acc=(acc_e_c + acc_e_l + acc_e_j) / 3,
        n_test=len(preds),
        ranges_used=ranges,
        per_sample=acc.mean(axis=1).tolist(),
    )


def evaluate(model: TrainedModel, entries: Sequence[DatasetEntry], ranges: ParamRanges = None) -> AccReport:
    """Predict every entry and score against its generating parameters."""
    preds = [predict(model, e.grid) for e in entries]
    return accuracy(preds, [e.params for e in entries], ranges)
