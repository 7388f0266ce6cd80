"""
Simulation and readout configuration models.
"""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import config


class SimConfig(BaseModel):
    """Flux grid, frequency window and transitions of a simulated spectrum."""
    model_config = ConfigDict(frozen=True)

    flux_points: int = Field(default=config.FLUX_POINTS, ge=2)
    f_min: float = config.F_MIN_GHZ
    f_max: float = config.F_MAX_GHZ
    transitions: List[Tuple[int, int]] = Field(
        default_factory=lambda: [tuple(t) for t in config.DEFAULT_TRANSITIONS]
    )
    basis_dim: int = config.DEFAULT_BASIS_DIM

    @model_validator(mode="after")
    def _check(self):
        if not self.f_min < self.f_max:
            raise ValueError(f"f_min must be below f_max (got {self.f_min}, {self.f_max})")
        for i, j in self.transitions:
            if not 0 <= i < j:
                raise ValueError(f"Transition ({i},{j}) must satisfy 0 <= i < j")
        return self

    def flux_grid(self) -> np.ndarray:
        """phi_k = 2 pi k / flux_points, k = 0 .. flux_points - 1."""
        return 2.0 * math.pi * np.arange(self.flux_points) / self.flux_points


class ReadoutConfig(BaseModel):
    """Dispersive readout resonator: frequency, linewidth, coupling and visibility cut."""
    model_config = ConfigDict(frozen=True)

    f_resonator: float = config.RESONATOR_GHZ
    linewidth: float = Field(default=config.RESONATOR_LINEWIDTH_GHZ, gt=0)
    coupling_g: float = Field(default=config.COUPLING_G_GHZ, ge=0)
    visibility_cutoff: float = Field(default=config.VISIBILITY_CUTOFF, ge=0, lt=1)
    n_perturb_states: int = Field(default=config.N_PERTURB_STATES, ge=2)
    exclude_resonator_band: bool = False
    resonator_band: float = Field(default=config.RESONATOR_BAND_GHZ, ge=0)
