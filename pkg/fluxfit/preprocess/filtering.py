"""
Magnitude filtering of spectroscopy maps.

A pixel is kept when it stands out from the background,
    magnitude > mean_bg + sigma_multiplier * sigma_bg,
and is not one of the dominant features of the map,
    magnitude < max_fraction * max(magnitude).

Background statistics come from an explicit index rectangle when the map has
one, otherwise from every frequency row: median as mean, 1.4826 * MAD as sigma.
"""

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import DegenerateBackgroundError
from .maps import MagnitudeMap

logger = logging.getLogger(__name__)

MAD_TO_SIGMA = 1.4826


class FilterConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma_multiplier: float = Field(default=2.5, gt=0)
    max_fraction: float = Field(default=0.20, gt=0, le=1)


@dataclass(frozen=True, eq=False)
class BackgroundStats:
    """Per-frequency-row background mean and sigma."""
    mean: np.ndarray
    sigma: np.ndarray
    source: str


def background_statistics(magnitude_map: MagnitudeMap) -> BackgroundStats:
    mags = magnitude_map.magnitudes
    rows = mags.shape[0]
    if magnitude_map.background_region is not None:
        f0, f1, b0, b1 = magnitude_map.background_region
        region = mags[f0:f1, b0:b1]
        if region.size == 0:
            raise DegenerateBackgroundError(
                f"Background region {magnitude_map.background_region} selects no pixels"
            )
        sigma = float(region.std())
        if sigma == 0.0:
            raise DegenerateBackgroundError("Background region has zero variance")
        return BackgroundStats(np.full(rows, float(region.mean())), np.full(rows, sigma), "region")

    median = np.median(mags, axis=1)
    sigma = MAD_TO_SIGMA * np.median(np.abs(mags - median[:, None]), axis=1)
    nonzero = sigma > 0
    if not nonzero.any():
        raise DegenerateBackgroundError("Map background has zero variance in every frequency row")
    if not nonzero.all():
        # Flat rows borrow the typical sigma of the others
        sigma = np.where(nonzero, sigma, np.median(sigma[nonzero]))
    return BackgroundStats(median, sigma, "row-median")


def magnitude_filter(magnitude_map: MagnitudeMap, cfg: FilterConfig = None) -> np.ndarray:
    """
    Boolean mask of pixels that may belong to transition lines.

    Args:
        magnitude_map: Measured map
        cfg: Thresholds

    Returns:
        Mask with the map's [frequency, bias] shape

    Raises:
        DegenerateBackgroundError: background variance is zero
    """
    cfg = cfg or FilterConfig()
    stats = background_statistics(magnitude_map)
    mags = magnitude_map.magnitudes
    lower = stats.mean[:, None] + cfg.sigma_multiplier * stats.sigma[:, None]
    upper = cfg.max_fraction * float(mags.max())
    mask = (mags > lower) & (mags < upper)
    logger.info(
        f"Magnitude filter ({stats.source} background, k={cfg.sigma_multiplier}, "
        f"max_fraction={cfg.max_fraction}): {int(mask.sum())}/{mask.size} pixels kept"
    )
    return mask
