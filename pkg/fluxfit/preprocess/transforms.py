"""
Point-set transforms for reduced measurements.

mirror_about_pi completes a half-period measurement using the symmetry of the
spectrum about phi_ext = pi; decimate_flux thins the flux sampling.
"""

import logging
import math

import numpy as np

from ..core.params import TWO_PI, ExternalFlux
from ..sim.points import SpectrumPoint, SpectrumPointSet

logger = logging.getLogger(__name__)


def mirror_about_pi(points: SpectrumPointSet, restrict: bool = True) -> SpectrumPointSet:
    """
    Add the image 2pi - phi of every point.

    Args:
        points: Measured or simulated points
        restrict: Keep only points with canonical flux in [0, pi] before mirroring

    Returns:
        Symmetrized set; points on 0 or pi map onto themselves and are kept once
    """
    source = [p for p in points if not restrict or ExternalFlux(p.phi_ext).canonical <= math.pi]
    mirrored = []
    for p in source:
        phi = ExternalFlux(p.phi_ext).canonical
        mirrored.append(SpectrumPoint(phi, p.frequency, p.magnitude, p.label))
        mirrored.append(SpectrumPoint(ExternalFlux(TWO_PI - phi).canonical, p.frequency, p.magnitude, p.label))
    out = points.derive(mirrored)
    logger.info(f"Mirrored {len(source)} points about pi into {len(out)} points")
    return out


def decimate_flux(points: SpectrumPointSet, factor: int = 2) -> SpectrumPointSet:
    """Keep the points of every factor-th distinct flux value (ascending order)."""
    if factor < 1:
        raise ValueError(f"factor must be >= 1 (got {factor})")
    fluxes = np.unique(points.fluxes)
    kept = set(fluxes[::factor].tolist())
    return points.derive([p for p in points if p.phi_ext in kept])
