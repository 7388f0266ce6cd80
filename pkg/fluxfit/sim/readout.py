"""
Dispersive readout simulation.

Second-order dispersive pull of qubit state s on a resonator at w_r coupled
through g * n * (a + a^dag):

    chi_s = g^2 * sum_{s' != s} |<s'|n|s>|^2 * 2 w_{s's} / (w_{s's}^2 - w_r^2),
    w_{s's} = E_s' - E_s.

The resonator frequency with the qubit in s is w_r - chi_s: chi_s is the
downward pull, so a qubit whose transitions lie below w_r pushes the resonator
up and gives chi_s < 0. Visibility depends only on |chi_i - chi_j|.

Visibility of a saturated transition i -> j is the change of a normalized
Lorentzian response probed at the state-i pulled resonator when the drive mixes
i and j 50/50:

    V = |L(0) - L((chi_i - chi_j) / 2)|,  L(d) = (k/2)^2 / (d^2 + (k/2)^2).

This visibility model is isolated in transition_visibility().
"""

import logging
from typing import Sequence, Tuple

import numpy as np

from .. import config
from ..core.hamiltonian import charge_matrices_batch
from ..core.params import ExternalFlux, QubitParams
from ..errors import NearResonanceError, TransitionIndexError
from .configs import ReadoutConfig, SimConfig
from .points import Provenance, SpectrumPoint, SpectrumPointSet
from .spectrum import pure_spectrum

logger = logging.getLogger(__name__)


def dispersive_shifts(
    params: QubitParams,
    fluxes: Sequence[float],
    r: ReadoutConfig,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pulls for every state below n_perturb_states at every flux.

    Returns:
        (chi of shape (K, n_perturb_states), near-resonance flags of the same shape)
    """
    n_states = r.n_perturb_states
    energies, charge = charge_matrices_batch(params, fluxes, n_states, basis_dim)

    # omega[k, s, s'] = E_s' - E_s
    omega = energies[:, None, :] - energies[:, :, None]
    denominator = omega ** 2 - r.f_resonator ** 2
    weight = np.abs(charge) ** 2
    off_diagonal = ~np.eye(n_states, dtype=bool)[None, :, :]

    near = (np.abs(denominator) < config.NEAR_RESONANCE_GUARD) & off_diagonal
    usable = off_diagonal & ~near
    safe = np.where(usable, denominator, 1.0)
    terms = np.where(usable, weight * 2.0 * omega / safe, 0.0)
    chi = r.coupling_g ** 2 * terms.sum(axis=2)
    return chi, near.any(axis=2)


def dispersive_pull(
    params: QubitParams,
    flux: ExternalFlux,
    state: int,
    r: ReadoutConfig = None,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> float:
    """Second-order pull chi_s in GHz for one state at one flux (resonator at w_r - chi_s)."""
    r = r or ReadoutConfig()
    if not 0 <= state < r.n_perturb_states:
        raise TransitionIndexError(
            f"State {state} outside the {r.n_perturb_states} perturbation states"
        )
    chi, flagged = dispersive_shifts(params, [flux.phi_ext], r, basis_dim)
    if flagged[0, state]:
        raise NearResonanceError(
            f"State {state} has a transition resonant with the readout at flux {flux.phi_ext}",
            {"state": state, "phi_ext": flux.phi_ext, "params": params.to_dict()},
        )
    return float(chi[0, state])


def lorentzian(detuning, linewidth: float):
    half = linewidth / 2.0
    return half ** 2 / (np.asarray(detuning) ** 2 + half ** 2)


def transition_visibility(chi_i, chi_j, linewidth: float):
    return np.abs(lorentzian(0.0, linewidth) - lorentzian((chi_i - chi_j) / 2.0, linewidth))


def dispersive_spectrum(
    params: QubitParams,
    cfg: SimConfig = None,
    r: ReadoutConfig = None,
) -> SpectrumPointSet:
    """
    Pure spectrum points that would be visible through dispersive readout.

    Args:
        params: Qubit energies
        cfg: Flux grid, window and transitions
        r: Readout resonator configuration

    Returns:
        Labeled point set with magnitude = visibility, a subset of pure_spectrum(params, cfg)
    """
    cfg = cfg or SimConfig()
    r = r or ReadoutConfig()
    needed = max(j for _, j in cfg.transitions) + 1
    if r.n_perturb_states < needed:
        raise TransitionIndexError(
            f"n_perturb_states={r.n_perturb_states} does not cover level {needed - 1}"
        )

    pure = pure_spectrum(params, cfg)
    fluxes = cfg.flux_grid()
    index_of = {float(phi): k for k, phi in enumerate(fluxes)}
    chi, flagged = dispersive_shifts(params, fluxes, r, cfg.basis_dim)

    points = []
    dropped_resonant = 0
    for p in pure:
        k = index_of[p.phi_ext]
        i, j = p.label
        if flagged[k, i] or flagged[k, j]:
            dropped_resonant += 1
            continue
        if r.exclude_resonator_band and abs(p.frequency - r.f_resonator) < r.resonator_band:
            continue
        visibility = float(transition_visibility(chi[k, i], chi[k, j], r.linewidth))
        if visibility >= r.visibility_cutoff and visibility > 0.0:
            points.append(SpectrumPoint(p.phi_ext, p.frequency, visibility, p.label))

    if dropped_resonant:
        logger.info(f"Dropped {dropped_resonant} near-resonant points for {params}")
    logger.debug(f"Dispersive spectrum for {params}: {len(points)}/{len(pure)} points visible")
    return SpectrumPointSet(
        points=points, provenance=Provenance.SIMULATED_DISPERSIVE, sim_config=cfg
    )
