"""
Rasterization of point sets into fixed-size (frequency x flux) grids.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import config
from ..sim.points import SpectrumPointSet


class IntensityMode(Enum):
    OCCUPANCY = "occupancy"
    MAGNITUDE = "magnitude"


class GridConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_flux_bins: int = Field(default=256, ge=8)
    n_freq_bins: int = Field(default=256, ge=8)
    f_min: float = config.F_MIN_GHZ
    f_max: float = config.F_MAX_GHZ
    intensity_mode: IntensityMode = IntensityMode.OCCUPANCY

    @model_validator(mode="after")
    def _check(self):
        if not self.f_min < self.f_max:
            raise ValueError(f"f_min must be below f_max (got {self.f_min}, {self.f_max})")
        return self

    @property
    def shape(self):
        return (self.n_freq_bins, self.n_flux_bins)


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Intensities in [0, 1], indexed [frequency bin, flux bin]."""
    values: np.ndarray
    grid_config: GridConfig

    @property
    def active_bins(self) -> int:
        return int(np.count_nonzero(self.values))


def rasterize(points: SpectrumPointSet, cfg: GridConfig = None) -> RasterGrid:
    """
    Map points onto bins.

    Frequency bin floor((f - f_min) / (f_max - f_min) * n_freq_bins), flux bin
    floor(phi / 2pi * n_flux_bins) on the canonical flux in [0, 2pi); both are
    clamped to the last bin. Points outside [f_min, f_max] are dropped.
    """
    cfg = cfg or GridConfig()
    values = np.zeros(cfg.shape, dtype=np.float32)
    if len(points) == 0:
        return RasterGrid(values=values, grid_config=cfg)

    freqs = points.frequencies
    phis = np.mod(points.fluxes, 2.0 * math.pi)
    inside = (freqs >= cfg.f_min) & (freqs <= cfg.f_max)

    rows = np.floor((freqs - cfg.f_min) / (cfg.f_max - cfg.f_min) * cfg.n_freq_bins)
    cols = np.floor(phis / (2.0 * math.pi) * cfg.n_flux_bins)
    rows = np.clip(rows, 0, cfg.n_freq_bins - 1).astype(int)[inside]
    cols = np.clip(cols, 0, cfg.n_flux_bins - 1).astype(int)[inside]

    if cfg.intensity_mode == IntensityMode.OCCUPANCY:
        values[rows, cols] = 1.0
    else:
        magnitudes = np.nan_to_num(points.magnitudes, nan=1.0)[inside]
        np.maximum.at(values, (rows, cols), np.clip(magnitudes, 0.0, 1.0).astype(np.float32))
    return RasterGrid(values=values, grid_config=cfg)
