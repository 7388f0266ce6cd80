"""
Transition labeling.

Each point is compared with every configured transition simulated from the
initial-guess parameters at the point's own flux. Exactly one transition
closer than the window labels the point; none or several make it an outlier.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import config
from ..core.hamiltonian import transition_frequencies
from ..core.params import QubitParams
from ..sim.points import Label, SpectrumPoint, SpectrumPointSet

logger = logging.getLogger(__name__)


class LabelConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    window: float = Field(default=config.LABEL_WINDOW_GHZ, gt=0)
    transitions: List[Tuple[int, int]] = Field(
        default_factory=lambda: [tuple(t) for t in config.DEFAULT_TRANSITIONS]
    )
    basis_dim: int = config.DEFAULT_BASIS_DIM

    @model_validator(mode="after")
    def _check(self):
        if not self.transitions:
            raise ValueError("At least one transition is required")
        for i, j in self.transitions:
            if not 0 <= i < j:
                raise ValueError(f"Transition ({i},{j}) must satisfy 0 <= i < j")
        return self


@dataclass
class LabeledSet:
    labeled: SpectrumPointSet
    outliers: SpectrumPointSet
    ambiguous_count: int = 0

    @property
    def counts(self) -> Dict[str, int]:
        return {
            "labeled": len(self.labeled),
            "outliers": len(self.outliers),
            "ambiguous": self.ambiguous_count,
        }

    def by_transition(self) -> Dict[Label, int]:
        out: Dict[Label, int] = {}
        for p in self.labeled:
            out[p.label] = out.get(p.label, 0) + 1
        return out


def simulated_table(
    params: QubitParams, fluxes: np.ndarray, cfg: LabelConfig
) -> Dict[float, np.ndarray]:
    """Transition frequencies per unique flux, one batched eigensolve."""
    unique = np.unique(np.asarray(fluxes, dtype=np.float64))
    if unique.size == 0:
        return {}
    table = transition_frequencies(params, unique, cfg.transitions, cfg.basis_dim)
    return {float(phi): table[k] for k, phi in enumerate(unique)}


def assign(frequency: float, simulated: np.ndarray, window: float) -> Tuple[Optional[int], int]:
    """(index of the single transition within window or None, number of matches)."""
    matches = np.flatnonzero(np.abs(simulated - frequency) < window)
    return (int(matches[0]) if matches.size == 1 else None), int(matches.size)


def label_points(
    points: SpectrumPointSet,
    params0: QubitParams,
    cfg: LabelConfig = None,
) -> LabeledSet:
    """
    Split points into labeled points and outliers.

    Args:
        points: Measured points (existing labels are replaced)
        params0: Initial-guess parameters used to simulate the transitions
        cfg: Window and transitions

    Returns:
        LabeledSet whose labeled and outlier sets partition the input
    """
    cfg = cfg or LabelConfig()
    table = simulated_table(params0, points.fluxes, cfg)

    labeled: List[SpectrumPoint] = []
    outliers: List[SpectrumPoint] = []
    ambiguous = 0
    for p in points:
        index, n_matches = assign(p.frequency, table[float(p.phi_ext)], cfg.window)
        if index is not None:
            labeled.append(replace(p, label=tuple(cfg.transitions[index])))
        else:
            outliers.append(replace(p, label=None))
            if n_matches > 1:
                ambiguous += 1

    result = LabeledSet(
        labeled=points.derive(labeled),
        outliers=points.derive(outliers),
        ambiguous_count=ambiguous,
    )
    logger.info(
        f"Labeled {len(result.labeled)} of {len(points)} points "
        f"({len(result.outliers)} outliers, {ambiguous} ambiguous) with window {cfg.window} GHz"
    )
    return result
