"""
Single-fluxonium Hamiltonian in the LC oscillator basis.

    H = 4 E_C n^2 - E_J cos(phi + phi_ext) + E_L phi^2 / 2

with phi = phi_zpf (a + a^dag) / sqrt(2), phi_zpf = (8 E_C / E_L)^(1/4) and
n = i (a^dag - a) / (sqrt(2) phi_zpf), so that [phi, n] = i. The LC part is
diagonal, sqrt(8 E_C E_L) (k + 1/2). The cosine is evaluated through the
eigen-decomposition of the truncated unit phase operator, which only depends on
the basis size and is cached.

Units: h = 1, energies in GHz, flux in radians.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .. import config
from ..errors import InvalidParameterError, NumericError, TransitionIndexError
from .params import ExternalFlux, QubitParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnergyLevels:
    """Lowest eigenenergies at one flux value, ascending."""
    energies: np.ndarray
    basis_dim: int
    params: QubitParams
    flux: ExternalFlux

    def transition(self, i: int, j: int) -> float:
        _check_pair(i, j, len(self.energies))
        return float(self.energies[j] - self.energies[i])


@dataclass(frozen=True, eq=False)
class ChargeMatrix:
    """<i|n|j> in the eigenbasis, i, j < n_states."""
    elements: np.ndarray
    n_states: int

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))


@lru_cache(maxsize=8)
def _phase_quadrature(basis_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues/vectors of (a + a^dag)/sqrt(2) truncated to basis_dim."""
    off_diagonal = np.sqrt(np.arange(1, basis_dim, dtype=np.float64) / 2.0)
    nodes, vectors = eigh_tridiagonal(np.zeros(basis_dim), off_diagonal)
    nodes.setflags(write=False)
    vectors.setflags(write=False)
    return nodes, vectors


@lru_cache(maxsize=8)
def _ladder_antisymmetric(basis_dim: int) -> np.ndarray:
    """a^dag - a in the oscillator basis."""
    a = np.diag(np.sqrt(np.arange(1, basis_dim, dtype=np.float64)), k=1)
    out = a.T - a
    out.setflags(write=False)
    return out


def phi_zpf(params: QubitParams) -> float:
    return (8.0 * params.e_c / params.e_l) ** 0.25


def plasma_energy(params: QubitParams) -> float:
    """sqrt(8 E_C E_L): level spacing of the E_J = 0 oscillator."""
    return math.sqrt(8.0 * params.e_c * params.e_l)


def _check_sizes(n_levels: int, basis_dim: int):
    if n_levels < 2:
        raise InvalidParameterError(f"n_levels must be >= 2 (got {n_levels})")
    if basis_dim < 4 * n_levels:
        raise NumericError(
            f"basis_dim={basis_dim} too small for {n_levels} levels (need >= {4 * n_levels})",
            {"basis_dim": basis_dim, "n_levels": n_levels},
        )


def _check_pair(i: int, j: int, n_levels: int):
    if i >= j:
        raise TransitionIndexError(f"Transition requires i < j (got i={i}, j={j})")
    if i < 0 or j >= n_levels:
        raise TransitionIndexError(
            f"Transition ({i},{j}) outside the {n_levels} computed levels"
        )


def levels_for(transitions: Sequence[Tuple[int, int]]) -> int:
    """Number of levels to solve for so that every transition is covered."""
    return max(config.DEFAULT_N_LEVELS, max((j for _, j in transitions), default=1) + 1)


def hamiltonian_stack(params: QubitParams, fluxes: np.ndarray, basis_dim: int) -> np.ndarray:
    """Hamiltonian matrices for every flux value, shape (K, basis_dim, basis_dim)."""
    fluxes = np.atleast_1d(np.asarray(fluxes, dtype=np.float64))
    nodes, vectors = _phase_quadrature(basis_dim)
    diagonal = plasma_energy(params) * (np.arange(basis_dim) + 0.5)
    h = np.zeros((fluxes.size, basis_dim, basis_dim))
    h[:, np.arange(basis_dim), np.arange(basis_dim)] = diagonal
    if params.e_j > 0:
        cosines = np.cos(phi_zpf(params) * nodes[None, :] + fluxes[:, None])
        h -= params.e_j * ((vectors[None, :, :] * cosines[:, None, :]) @ vectors.T)
    return h


def eigensystem_batch(
    params: QubitParams,
    fluxes: Iterable[float],
    n_levels: int = config.DEFAULT_N_LEVELS,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
    with_vectors: bool = False,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Diagonalize the Hamiltonian at many flux values at once.

    Args:
        params: Qubit energies
        fluxes: Flux values in radians
        n_levels: Number of lowest levels to keep
        basis_dim: Oscillator basis size
        with_vectors: Also return eigenvectors (K, basis_dim, n_levels)

    Returns:
        (energies of shape (K, n_levels), eigenvectors or None)
    """
    _check_sizes(n_levels, basis_dim)
    fluxes = np.atleast_1d(np.asarray(list(fluxes), dtype=np.float64))
    if fluxes.size == 0:
        vectors = np.zeros((0, basis_dim, n_levels)) if with_vectors else None
        return np.zeros((0, n_levels)), vectors

    h = hamiltonian_stack(params, fluxes, basis_dim)
    try:
        if with_vectors:
            energies, vectors = np.linalg.eigh(h)
            vectors = vectors[:, :, :n_levels]
        else:
            energies, vectors = np.linalg.eigvalsh(h), None
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"Eigensolver did not converge: {e}",
            {"params": params.to_dict(), "basis_dim": basis_dim, "n_flux": int(fluxes.size)},
        )
    energies = energies[:, :n_levels]
    if not np.all(np.isfinite(energies)):
        raise NumericError("Eigensolver returned non-finite energies", {"params": params.to_dict()})
    return energies, vectors


def eigenenergies(
    params: QubitParams,
    flux: ExternalFlux,
    n_levels: int = config.DEFAULT_N_LEVELS,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> EnergyLevels:
    """Lowest n_levels eigenenergies at one flux value."""
    energies, _ = eigensystem_batch(params, [flux.phi_ext], n_levels, basis_dim)
    return EnergyLevels(energies=energies[0], basis_dim=basis_dim, params=params, flux=flux)


def transition_frequency(
    params: QubitParams,
    flux: ExternalFlux,
    i: int,
    j: int,
    n_levels: int = config.DEFAULT_N_LEVELS,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> float:
    """E_j - E_i in GHz."""
    _check_pair(i, j, n_levels)
    return eigenenergies(params, flux, n_levels, basis_dim).transition(i, j)


def transition_frequencies(
    params: QubitParams,
    fluxes: Iterable[float],
    transitions: Sequence[Tuple[int, int]],
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> np.ndarray:
    """Transition frequencies of shape (K, T) for K flux values and T transitions."""
    n_levels = levels_for(transitions)
    for i, j in transitions:
        _check_pair(i, j, n_levels)
    energies, _ = eigensystem_batch(params, fluxes, n_levels, basis_dim)
    lower = np.array([i for i, _ in transitions], dtype=int)
    upper = np.array([j for _, j in transitions], dtype=int)
    return energies[:, upper] - energies[:, lower]


def charge_matrices_batch(
    params: QubitParams,
    fluxes: Iterable[float],
    n_states: int,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> Tuple[np.ndarray, np.ndarray]:
    """Energies (K, n_states) and charge matrices (K, n_states, n_states) in the eigenbasis."""
    energies, vectors = eigensystem_batch(params, fluxes, n_states, basis_dim, with_vectors=True)
    ladder = _ladder_antisymmetric(basis_dim)
    real_part = np.swapaxes(vectors, -1, -2) @ ladder @ vectors
    return energies, 1j * real_part / (math.sqrt(2.0) * phi_zpf(params))


def charge_matrix_elements(
    params: QubitParams,
    flux: ExternalFlux,
    n_states: int,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> ChargeMatrix:
    """<i|n|j> between the lowest n_states eigenstates at one flux value."""
    _, matrices = charge_matrices_batch(params, [flux.phi_ext], n_states, basis_dim)
    return ChargeMatrix(elements=matrices[0], n_states=n_states)
