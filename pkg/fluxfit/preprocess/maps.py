"""
Measured two-dimensional spectroscopy maps and flux calibration.

Input text formats (comma or whitespace separated, '#' comments allowed):

Dense grid - first row is the bias axis after a corner cell, first column is
the frequency axis in GHz:

    nan   0.00  0.01  0.02 ...
    4.000 0.12  0.11  0.13 ...

Triplet list - header line naming the columns, then one row per sample:

    bias,freq_ghz,magnitude
    0.00,4.000,0.12
"""

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigError, DatasetIOError, ShapeError

logger = logging.getLogger(__name__)

TRIPLET_HEADER = ("bias", "freq_ghz", "magnitude")


def _strictly_monotone(axis: np.ndarray) -> bool:
    if axis.size < 2:
        return True
    steps = np.diff(axis)
    return bool(np.all(steps > 0) or np.all(steps < 0))


@dataclass(frozen=True, eq=False)
class MagnitudeMap:
    """
    Magnitudes indexed [frequency, bias].

    background_region is an index rectangle (freq_start, freq_stop, bias_start, bias_stop).
    phi_axis is set by flux_calibrate.
    """
    bias_axis: np.ndarray
    freq_axis: np.ndarray
    magnitudes: np.ndarray
    background_region: Optional[Tuple[int, int, int, int]] = None
    phi_axis: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("bias_axis", "freq_axis", "magnitudes"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.magnitudes.shape != (self.freq_axis.size, self.bias_axis.size):
            raise ShapeError(
                f"Magnitude array {self.magnitudes.shape} does not match axes "
                f"({self.freq_axis.size}, {self.bias_axis.size})"
            )
        if not _strictly_monotone(self.bias_axis) or not _strictly_monotone(self.freq_axis):
            raise ConfigError("Map axes must be strictly monotone")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.magnitudes.shape

    def scaled(self, factor: float) -> "MagnitudeMap":
        return replace(self, magnitudes=self.magnitudes * factor)


@dataclass(frozen=True)
class FluxMap:
    """Bias values at which the external flux is 0 and pi."""
    bias_at_zero: float
    bias_at_pi: float

    def __post_init__(self):
        if self.bias_at_zero == self.bias_at_pi:
            raise ConfigError(
                f"Calibration biases must differ (both {self.bias_at_zero})"
            )

    def to_phi(self, bias) -> np.ndarray:
        return math.pi * (np.asarray(bias, dtype=np.float64) - self.bias_at_zero) / (
            self.bias_at_pi - self.bias_at_zero
        )


def flux_calibrate(magnitude_map: MagnitudeMap, cal: FluxMap) -> MagnitudeMap:
    """Attach the phi_ext axis given by the affine bias -> flux map."""
    span = magnitude_map.bias_axis
    low, high = float(span.min()), float(span.max())
    width = high - low
    for bias in (cal.bias_at_zero, cal.bias_at_pi):
        if width > 0 and not (low - width <= bias <= high + width):
            logger.warning(f"Calibration bias {bias} lies far outside the bias span [{low}, {high}]")
    return replace(magnitude_map, phi_axis=cal.to_phi(span))


def _split(line: str):
    return [t for t in (line.replace(",", " ").split()) if t]


def load_magnitude_map(path) -> MagnitudeMap:
    """Read a dense-grid or triplet-list map; the format is detected from the first line."""
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"Map file not found: {path}", path=path)
    with open(path, "r") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DatasetIOError(f"Map file is empty: {path}", path=path)

    first = [t.lower() for t in _split(lines[0])]
    try:
        if tuple(first[:3]) == TRIPLET_HEADER:
            rows = np.array([[float(t) for t in _split(ln)] for ln in lines[1:]])
            return _from_triplets(rows, path)
        table = np.array([[float(t) for t in _split(ln)] for ln in lines])
    except ValueError as e:
        raise DatasetIOError(f"Cannot parse map {path}: {e}", path=path)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise ShapeError(f"Dense map {path} needs at least one bias column and one frequency row")
    return MagnitudeMap(bias_axis=table[0, 1:], freq_axis=table[1:, 0], magnitudes=table[1:, 1:])


def _from_triplets(rows: np.ndarray, path: Path) -> MagnitudeMap:
    if rows.ndim != 2 or rows.shape[1] < 3:
        raise ShapeError(f"Triplet map {path} needs three columns")
    bias_axis = np.unique(rows[:, 0])
    freq_axis = np.unique(rows[:, 1])
    grid = np.full((freq_axis.size, bias_axis.size), np.nan)
    grid[np.searchsorted(freq_axis, rows[:, 1]), np.searchsorted(bias_axis, rows[:, 0])] = rows[:, 2]
    if np.isnan(grid).any():
        raise DatasetIOError(f"Triplet map {path} does not cover a full bias x frequency grid", path=path)
    return MagnitudeMap(bias_axis=bias_axis, freq_axis=freq_axis, magnitudes=grid)


def write_magnitude_map(magnitude_map: MagnitudeMap, path) -> Path:
    """Write a map in the dense-grid format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.empty((magnitude_map.freq_axis.size + 1, magnitude_map.bias_axis.size + 1))
    table[0, 0] = np.nan
    table[0, 1:] = magnitude_map.bias_axis
    table[1:, 0] = magnitude_map.freq_axis
    table[1:, 1:] = magnitude_map.magnitudes
    np.savetxt(path, table, delimiter=",", fmt="%.17g")
    return path
