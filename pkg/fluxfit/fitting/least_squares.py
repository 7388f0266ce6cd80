"""
Least-squares refinement of (E_C, E_L, E_J) against labeled spectrum points.

Damped Gauss-Newton (Levenberg-Marquardt) with a forward-difference Jacobian.
One iteration is one proposed damped step: accepted when it lowers the
residual sum of squares (damping / 10), rejected otherwise (damping * 10).
Parameters are clamped into the configured bounds after every step.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .. import config
from ..core.hamiltonian import transition_frequencies
from ..core.params import ParamRanges, QubitParams
from ..errors import ConfigError
from ..labeling.labeler import LabeledSet
from ..sim.points import SpectrumPointSet, format_label

logger = logging.getLogger(__name__)

MIN_DAMPING = 1e-12
MAX_DAMPING = 1e12
INIT_BOX_FACTOR = 2.0


def default_bounds() -> ParamRanges:
    """Half the training lows to 1.5x the training highs."""
    base = ParamRanges()
    return ParamRanges(
        e_c=(base.e_c[0] * 0.5, base.e_c[1] * 1.5),
        e_l=(base.e_l[0] * 0.5, base.e_l[1] * 1.5),
        e_j=(base.e_j[0] * 0.5, base.e_j[1] * 1.5),
    )


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default=50, ge=1)
    bounds: ParamRanges = Field(default_factory=default_bounds)
    damping_init: float = Field(default=1e-3, gt=0)
    convergence_tol: float = Field(default=1e-9, gt=0)
    jacobian_step: float = Field(default=1e-6, gt=0)
    basis_dim: int = config.DEFAULT_BASIS_DIM

    @classmethod
    def study_budget(cls, **overrides) -> "FitConfig":
        """Five-iteration budget used by the comparison harness."""
        return cls(**{"max_iterations": config.STUDY_ITERATIONS, **overrides})


@dataclass
class FitResult:
    params: QubitParams
    initial: QubitParams
    n_iterations: int
    converged: bool
    rss: float
    per_transition: Dict[str, Dict[str, float]] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    rss_history: List[float] = field(default_factory=list)

    @property
    def clamped(self) -> bool:
        return "clamped" in self.flags

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "initial": self.initial.to_dict(),
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "rss": self.rss,
            "per_transition": self.per_transition,
            "flags": list(self.flags),
        }


Points = Union[LabeledSet, SpectrumPointSet]


class SpectrumResiduals:
    """
    Residual function f_model(label, phi; params) - f_measured over a fixed point set.

    Unique fluxes and transitions are indexed once so every evaluation is a
    single batched eigensolve.
    """

    def __init__(self, points: Points, basis_dim: int = config.DEFAULT_BASIS_DIM):
        if isinstance(points, LabeledSet):
            points = points.labeled
        if len(points) == 0:
            raise ConfigError("Cannot compute residuals of an empty labeled set")
        labels = points.labels
        if any(label is None for label in labels):
            raise ConfigError("All points must be labeled before fitting")
        self.basis_dim = basis_dim
        self.labels = labels
        self.transitions = sorted(set(labels))
        self.fluxes, self._flux_index = np.unique(points.fluxes, return_inverse=True)
        lookup = {t: k for k, t in enumerate(self.transitions)}
        self._transition_index = np.array([lookup[label] for label in labels], dtype=int)
        self.measured = points.frequencies

    def __len__(self) -> int:
        return self.measured.size

    def model_frequencies(self, params: QubitParams) -> np.ndarray:
        table = transition_frequencies(params, self.fluxes, self.transitions, self.basis_dim)
        return table[self._flux_index, self._transition_index]

    def __call__(self, params: QubitParams) -> np.ndarray:
        return self.model_frequencies(params) - self.measured

    def per_transition(self, r: np.ndarray) -> Dict[str, Dict[str, float]]:
        stats = {}
        for k, transition in enumerate(self.transitions):
            chunk = r[self._transition_index == k]
            stats[format_label(transition)] = {
                "n": int(chunk.size),
                "rms": float(np.sqrt(np.mean(chunk * chunk))),
                "max_abs": float(np.max(np.abs(chunk))),
            }
        return stats


def residuals(labeled: Points, params: QubitParams, basis_dim: int = config.DEFAULT_BASIS_DIM) -> np.ndarray:
    """Model minus measured frequency for every labeled point (GHz)."""
    return SpectrumResiduals(labeled, basis_dim)(params)


def _jacobian(fn: SpectrumResiduals, values: np.ndarray, r0: np.ndarray, step: float) -> np.ndarray:
    jac = np.empty((r0.size, values.size))
    for k in range(values.size):
        h = step * max(abs(values[k]), 1e-3)
        shifted = values.copy()
        shifted[k] += h
        jac[:, k] = (fn(QubitParams.from_array(shifted)) - r0) / h
    return jac


def numeric_jacobian(
    labeled: Points,
    params: QubitParams,
    step: float = 1e-6,
    basis_dim: int = config.DEFAULT_BASIS_DIM,
) -> np.ndarray:
    """Forward-difference Jacobian d r / d (E_C, E_L, E_J) with relative step."""
    fn = SpectrumResiduals(labeled, basis_dim)
    return _jacobian(fn, params.as_array(), fn(params), step)


def fit(labeled: Points, init: QubitParams, cfg: FitConfig = None) -> FitResult:
    """
    Refine parameters from an initial guess.

    Args:
        labeled: Labeled points (LabeledSet or fully labeled SpectrumPointSet)
        init: Initial guess; must lie within twice the bounds box
        cfg: Iteration budget, bounds, damping and tolerances

    Returns:
        FitResult; singular or stalled problems give converged=False rather than raising
    """
    cfg = cfg or FitConfig()
    fn = SpectrumResiduals(labeled, cfg.basis_dim)
    bounds = cfg.bounds
    if not bounds.scaled(INIT_BOX_FACTOR).contains(init):
        raise ConfigError(f"Initial guess {init} lies outside twice the fit bounds")

    flags: List[str] = []
    if len(fn) < 3:
        flags.append("underdetermined")
    x, clamped = bounds.clip(init.as_array())
    if clamped:
        flags.append("clamped")
    r = fn(QubitParams.from_array(x))
    rss = float(r @ r)
    history = [rss]
    damping = cfg.damping_init
    converged = False
    iterations = 0

    while iterations < cfg.max_iterations:
        iterations += 1
        jac = _jacobian(fn, x, r, cfg.jacobian_step)
        normal = jac.T @ jac
        gradient = jac.T @ r
        scale = np.diag(normal).copy()
        scale[scale <= 0] = 1.0
        try:
            delta = np.linalg.solve(normal + damping * np.diag(scale), -gradient)
        except np.linalg.LinAlgError:
            damping *= 10.0
            logger.debug(f"iteration {iterations}: singular normal equations, damping -> {damping:g}")
            if damping > MAX_DAMPING:
                break
            continue

        trial, step_clamped = bounds.clip(x + delta)
        step = float(np.linalg.norm(trial - x))
        small_step = step <= cfg.convergence_tol * max(float(np.linalg.norm(x)), 1e-12)
        r_trial = fn(QubitParams.from_array(trial))
        rss_trial = float(r_trial @ r_trial)

        accepted = rss_trial < rss
        if accepted:
            x, r, rss = trial, r_trial, rss_trial
            history.append(rss)
            damping = max(damping / 10.0, MIN_DAMPING)
            if step_clamped and "clamped" not in flags:
                flags.append("clamped")
            logger.debug(f"iteration {iterations}: accepted, rss={rss:.6g}, damping={damping:g}")
        else:
            damping *= 10.0
            logger.debug(f"iteration {iterations}: rejected (rss {rss_trial:.6g}), damping={damping:g}")

        # rejected steps pinned at a bound never count as converged
        if rss == 0.0 or (small_step and (accepted or not step_clamped)):
            converged = True
            break
        if damping > MAX_DAMPING:
            logger.info("Fit stopped: damping reached its maximum")
            break

    if "clamped" not in flags and (np.any(x <= bounds.lows) or np.any(x >= bounds.highs)):
        flags.append("clamped")
    if "underdetermined" in flags:
        converged = False
    params = QubitParams.from_array(x)
    logger.info(
        f"Fit {'converged' if converged else 'stopped'} after {iterations} iterations: "
        f"{params}, rss={rss:.3g} GHz^2"
    )
    return FitResult(
        params=params,
        initial=init,
        n_iterations=iterations,
        converged=converged,
        rss=rss,
        per_transition=fn.per_transition(r),
        flags=flags,
        rss_history=history,
    )
