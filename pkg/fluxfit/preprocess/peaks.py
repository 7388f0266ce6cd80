"""
Peak extraction: masked magnitude trace per flux column -> spectrum points.

Ridges are found with scipy's continuous-wavelet-transform peak finder (Ricker
wavelet), snapped to the local trace maximum and optionally refined to sub-bin
precision by a parabola through the maximum and its two neighbours.
Each trace is measured from its column median.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks_cwt

from ..errors import ConfigError, ShapeError
from ..sim.points import Provenance, SpectrumPoint, SpectrumPointSet
from .maps import MagnitudeMap

logger = logging.getLogger(__name__)


class PeakConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    wavelet_widths: List[float] = Field(default_factory=lambda: [float(w) for w in range(1, 17)])
    min_ridge_length: int = Field(default=3, ge=1)
    smoothing: Optional[int] = Field(default=None, ge=1)
    refine: bool = True
    snap_radius: int = Field(default=2, ge=0)

    @field_validator("wavelet_widths")
    @classmethod
    def _positive(cls, widths):
        if not widths or any(w <= 0 for w in widths):
            raise ValueError(f"wavelet_widths must be non-empty and positive (got {widths})")
        return widths


def _refine(trace: np.ndarray, index: int) -> float:
    """Fractional bin offset of the parabola vertex through index-1, index, index+1."""
    if index <= 0 or index >= trace.size - 1:
        return 0.0
    y0, y1, y2 = trace[index - 1], trace[index], trace[index + 1]
    curvature = y0 - 2.0 * y1 + y2
    if curvature >= 0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / curvature, -0.5, 0.5))


def column_peaks(trace: np.ndarray, column_mask: np.ndarray, pcfg: PeakConfig) -> List[float]:
    """Fractional row positions of accepted peaks (unmasked, above baseline) in one trace."""
    if not column_mask.any():
        return []
    candidates = find_peaks_cwt(
        trace, np.asarray(pcfg.wavelet_widths), min_length=pcfg.min_ridge_length
    )
    positions = []
    seen = set()
    r = pcfg.snap_radius
    for index in np.asarray(candidates, dtype=int):
        lo, hi = max(0, index - r), min(trace.size, index + r + 1)
        snapped = lo + int(np.argmax(trace[lo:hi]))
        if not column_mask[snapped] or trace[snapped] <= 0 or snapped in seen:
            continue
        seen.add(snapped)
        offset = _refine(trace, snapped) if pcfg.refine else 0.0
        positions.append(snapped + offset)
    return sorted(positions)


def extract_peaks(
    magnitude_map: MagnitudeMap,
    mask: np.ndarray,
    pcfg: PeakConfig = None,
) -> SpectrumPointSet:
    """
    Turn a filtered, calibrated map into unlabeled measured points.

    Points are ordered by ascending flux, then frequency. Magnitudes are
    normalised by the map's maximum absolute magnitude.
    """
    pcfg = pcfg or PeakConfig()
    if magnitude_map.phi_axis is None:
        raise ConfigError("Map has no flux axis; run flux_calibrate first")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != magnitude_map.shape:
        raise ShapeError(f"Mask {mask.shape} does not match map {magnitude_map.shape}")

    mags = magnitude_map.magnitudes
    rows = np.arange(mags.shape[0], dtype=np.float64)
    baseline = np.median(mags, axis=0)
    scale = float(np.max(np.abs(mags))) or 1.0
    logger.info(
        f"Peak extraction: widths {pcfg.wavelet_widths[0]}..{pcfg.wavelet_widths[-1]} bins, "
        f"min ridge length {pcfg.min_ridge_length}, smoothing {pcfg.smoothing}"
    )

    points = []
    for column in range(mags.shape[1]):
        trace = np.where(mask[:, column], mags[:, column] - baseline[column], 0.0)
        if pcfg.smoothing:
            trace = uniform_filter1d(trace, size=pcfg.smoothing)
        for position in column_peaks(trace, mask[:, column], pcfg):
            row = int(round(position))
            points.append(SpectrumPoint(
                phi_ext=float(magnitude_map.phi_axis[column]),
                frequency=float(np.interp(position, rows, magnitude_map.freq_axis)),
                magnitude=float(mags[row, column] / scale),
            ))
    points.sort(key=lambda p: (p.phi_ext, p.frequency))
    logger.info(f"Extracted {len(points)} points from {mags.shape[1]} flux columns")
    return SpectrumPointSet(points=points, provenance=Provenance.MEASURED)
