"""
Pure transition spectrum: every configured transition at every flux grid value,
kept when it falls inside the frequency window.
"""

import logging

from ..core.hamiltonian import transition_frequencies
from ..core.params import QubitParams
from .configs import SimConfig
from .points import Provenance, SpectrumPoint, SpectrumPointSet

logger = logging.getLogger(__name__)


def pure_spectrum(params: QubitParams, cfg: SimConfig = None) -> SpectrumPointSet:
    """
    Simulate the transition spectrum without readout physics.

    Args:
        params: Qubit energies
        cfg: Flux grid, window and transitions

    Returns:
        Labeled point set, magnitudes absent
    """
    cfg = cfg or SimConfig()
    fluxes = cfg.flux_grid()
    frequencies = transition_frequencies(params, fluxes, cfg.transitions, cfg.basis_dim)

    points = []
    for k, phi in enumerate(fluxes):
        for t, label in enumerate(cfg.transitions):
            f = float(frequencies[k, t])
            if cfg.f_min <= f <= cfg.f_max:
                points.append(SpectrumPoint(phi_ext=float(phi), frequency=f, label=tuple(label)))

    logger.debug(f"Pure spectrum for {params}: {len(points)} points")
    return SpectrumPointSet(points=points, provenance=Provenance.SIMULATED_PURE, sim_config=cfg)
