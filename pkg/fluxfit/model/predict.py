"""
Inference: raster grid -> initial-guess parameters.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .. import config
from ..core.params import QubitParams
from ..data.raster import RasterGrid
from ..errors import ShapeError
from .training import TrainedModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    params: QubitParams
    clamped: bool
    n_active_bins: int

    def to_dict(self) -> dict:
        return {**self.params.to_dict(), "clamped": self.clamped, "n_active_bins": self.n_active_bins}


def raw_outputs(model: TrainedModel, values: np.ndarray) -> np.ndarray:
    """Denormalised network outputs for a (N, rows, cols) stack, no clamping."""
    dtype = model.network.named_params()[0][1].dtype
    out = model.network.forward(values[:, None, :, :].astype(dtype))
    return model.from_outputs(out)


def predict_detailed(model: TrainedModel, grid: RasterGrid) -> Prediction:
    values = np.asarray(grid.values)
    if values.shape != tuple(model.config.input_dims):
        raise ShapeError(f"Grid is {values.shape}, model expects {tuple(model.config.input_dims)}")
    active = int(np.count_nonzero(values))
    if active < config.LOW_INFORMATION_BINS:
        logger.warning(
            f"Input raster has only {active} active bins; prediction may be unreliable"
        )
    estimate = raw_outputs(model, values[None])[0]
    box = model.target_normalization.scaled(config.PREDICT_CLAMP_FACTOR)
    estimate = np.nan_to_num(estimate, nan=0.0, posinf=box.highs.max(), neginf=0.0)
    clipped, clamped = box.clip(estimate)
    if clamped:
        logger.warning(f"Prediction {estimate.tolist()} clamped into {box.lows.tolist()}..{box.highs.tolist()}")
    return Prediction(QubitParams.from_array(clipped), clamped, active)


def predict(model: TrainedModel, grid: RasterGrid) -> QubitParams:
    """Initial guess (E_C⁰, E_L⁰, E_J⁰); deterministic, clamped to 1.25x the training ranges."""
    return predict_detailed(model, grid).params
