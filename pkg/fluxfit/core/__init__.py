"""Fluxonium Hamiltonian: parameters, eigenenergies, transitions, charge matrix elements."""

from .params import AXES, ExternalFlux, ParamRanges, QubitParams
from .hamiltonian import (
    ChargeMatrix,
    EnergyLevels,
    charge_matrices_batch,
    charge_matrix_elements,
    eigenenergies,
    eigensystem_batch,
    levels_for,
    plasma_energy,
    transition_frequencies,
    transition_frequency,
)

__all__ = [
    "AXES", "ExternalFlux", "ParamRanges", "QubitParams",
    "ChargeMatrix", "EnergyLevels", "charge_matrices_batch", "charge_matrix_elements",
    "eigenenergies", "eigensystem_batch", "levels_for", "plasma_energy",
    "transition_frequencies", "transition_frequency",
]
