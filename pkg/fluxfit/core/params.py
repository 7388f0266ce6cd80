"""
Qubit parameter and flux value types.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .. import config
from ..errors import InvalidParameterError

AXES = ("e_c", "e_l", "e_j")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitParams:
    """Fluxonium energies (E_C, E_L, E_J) in GHz."""
    e_c: float
    e_l: float
    e_j: float

    def __post_init__(self):
        values = (self.e_c, self.e_l, self.e_j)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError(f"Non-finite qubit parameters: {values}")
        if self.e_c <= 0 or self.e_l <= 0:
            raise InvalidParameterError(
                f"E_C and E_L must be positive (got e_c={self.e_c}, e_l={self.e_l})"
            )
        if self.e_j < 0:
            raise InvalidParameterError(f"E_J must be non-negative (got {self.e_j})")

    def as_array(self) -> np.ndarray:
        return np.array([self.e_c, self.e_l, self.e_j], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "QubitParams":
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def in_training_range(self, ranges: "ParamRanges" = None) -> bool:
        return (ranges or ParamRanges()).contains(self)

    def to_dict(self) -> dict:
        return {"e_c": self.e_c, "e_l": self.e_l, "e_j": self.e_j}

    @classmethod
    def from_dict(cls, data: dict) -> "QubitParams":
        return cls(float(data["e_c"]), float(data["e_l"]), float(data["e_j"]))

    def __str__(self) -> str:
        return f"(E_C={self.e_c:.4f}, E_L={self.e_l:.4f}, E_J={self.e_j:.4f}) GHz"


@dataclass(frozen=True)
class ExternalFlux:
    """Reduced external flux in radians."""
    phi_ext: float

    def __post_init__(self):
        if not math.isfinite(self.phi_ext):
            raise InvalidParameterError(f"Non-finite flux: {self.phi_ext}")

    @property
    def canonical(self) -> float:
        """Representative in [0, 2π)."""
        value = math.fmod(self.phi_ext, TWO_PI)
        if value < 0:
            value += TWO_PI
        return 0.0 if value >= TWO_PI else value


class ParamRanges(BaseModel):
    """Per-axis [low, high] ranges in GHz."""
    model_config = ConfigDict(frozen=True)

    e_c: Tuple[float, float] = config.E_C_RANGE
    e_l: Tuple[float, float] = config.E_L_RANGE
    e_j: Tuple[float, float] = config.E_J_RANGE

    @model_validator(mode="after")
    def _check_order(self):
        for name in AXES:
            low, high = getattr(self, name)
            if not low < high:
                raise ValueError(f"{name} range must satisfy low < high (got {low}, {high})")
        return self

    @property
    def lows(self) -> np.ndarray:
        return np.array([self.e_c[0], self.e_l[0], self.e_j[0]], dtype=np.float64)

    @property
    def highs(self) -> np.ndarray:
        return np.array([self.e_c[1], self.e_l[1], self.e_j[1]], dtype=np.float64)

    @property
    def spans(self) -> np.ndarray:
        return self.highs - self.lows

    def contains(self, params: QubitParams) -> bool:
        values = params.as_array()
        return bool(np.all(values >= self.lows) and np.all(values <= self.highs))

    def scaled(self, factor: float) -> "ParamRanges":
        """Box [low / factor, high * factor] on every axis."""
        return ParamRanges(
            e_c=(self.e_c[0] / factor, self.e_c[1] * factor),
            e_l=(self.e_l[0] / factor, self.e_l[1] * factor),
            e_j=(self.e_j[0] / factor, self.e_j[1] * factor),
        )

    def clip(self, values: np.ndarray) -> Tuple[np.ndarray, bool]:
        clipped = np.clip(values, self.lows, self.highs)
        return clipped, bool(np.any(clipped != values))

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (values - self.lows) / self.spans

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return values * self.spans + self.lows
