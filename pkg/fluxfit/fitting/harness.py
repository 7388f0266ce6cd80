"""
Initial-guess studies.

compare_random_vs_ml fits every case from uniformly random initial values and
from the regressor's prediction, then summarises Error and Cost per arm.
scan_initial_grid fits from every node of a two-parameter grid of initial
values (third parameter fixed) and records Error and log10(Cost) maps.

Fits are independent and run on a thread pool; results are always merged in
index order so seeded runs reproduce identical tables.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.params import AXES, ParamRanges, QubitParams
from ..data.raster import GridConfig, rasterize
from ..errors import ConfigError, InvalidParameterError
from ..model.predict import predict
from ..sim.configs import ReadoutConfig, SimConfig
from ..sim.points import Provenance, SpectrumPointSet
from ..sim.readout import dispersive_spectrum
from ..sim.spectrum import pure_spectrum
from .least_squares import INIT_BOX_FACTOR, FitConfig, FitResult, fit
from .metrics import cost_metric, error_metric, log_cost

logger = logging.getLogger(__name__)


class HarnessConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    flux_points: int = Field(default=64, ge=2)
    grid: GridConfig = Field(default_factory=GridConfig)
    ml_input: Provenance = Provenance.SIMULATED_DISPERSIVE
    workers: int = Field(default=1, ge=1)


@dataclass(frozen=True)
class InitOutcome:
    init: QubitParams
    fit: FitResult
    error: float
    cost: float


def reference_spectrum(case: QubitParams, hcfg: HarnessConfig = None) -> SpectrumPointSet:
    """Labeled pure spectrum of the case on the harness flux grid."""
    hcfg = hcfg or HarnessConfig()
    reference = pure_spectrum(case, SimConfig(flux_points=hcfg.flux_points))
    if len(reference) == 0:
        raise ConfigError(f"Case {case} has no transitions inside the frequency window")
    return reference


def _map_ordered(fn, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def evaluate_inits(
    case: QubitParams,
    inits: Sequence[QubitParams],
    cfg: FitConfig = None,
    hcfg: HarnessConfig = None,
    reference: SpectrumPointSet = None,
) -> List[InitOutcome]:
    """Fit the case's reference spectrum from every init and score the results."""
    cfg = cfg or FitConfig.study_budget()
    hcfg = hcfg or HarnessConfig()
    reference = reference if reference is not None else reference_spectrum(case, hcfg)

    def run(init: QubitParams) -> InitOutcome:
        result = fit(reference, init, cfg)
        return InitOutcome(
            init=init,
            fit=result,
            error=error_metric(result.params, case),
            cost=cost_metric(result.params, reference, cfg.basis_dim),
        )

    return _map_ordered(run, list(inits), hcfg.workers)


def init_rng(seed: int) -> np.random.Generator:
    """Stream of random inits, independent of sample_params(..., seed=seed)."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])


def random_inits(n: int, rng: np.random.Generator, ranges: ParamRanges = None) -> List[QubitParams]:
    ranges = ranges or ParamRanges()
    return [QubitParams.from_array(rng.uniform(ranges.lows, ranges.highs)) for _ in range(n)]


def ml_input_grid(case: QubitParams, hcfg: HarnessConfig, grid: GridConfig = None,
                  readout: ReadoutConfig = None):
    """Raster the regressor sees for a synthetic case (grid defaults to hcfg.grid)."""
    sim = SimConfig()
    if hcfg.ml_input == Provenance.SIMULATED_DISPERSIVE:
        points = dispersive_spectrum(case, sim, readout or ReadoutConfig())
    else:
        points = pure_spectrum(case, sim)
    return rasterize(points, grid or hcfg.grid)


@dataclass(frozen=True)
class ArmStats:
    error_avg: float
    error_std: float
    cost_avg: float
    cost_std: float
    n_fits: int

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[InitOutcome]) -> "ArmStats":
        errors = np.array([o.error for o in outcomes])
        costs = np.array([o.cost for o in outcomes])
        return cls(
            error_avg=float(errors.mean()),
            error_std=float(errors.std()),
            cost_avg=float(costs.mean()),
            cost_std=float(costs.std()),
            n_fits=len(outcomes),
        )

    def to_dict(self) -> dict:
        return {
            "error_avg": self.error_avg,
            "error_std": self.error_std,
            "cost_avg": self.cost_avg,
            "cost_std": self.cost_std,
            "n_fits": self.n_fits,
        }


@dataclass
class CaseRecord:
    case: QubitParams
    random: ArmStats
    ml: Optional[ArmStats] = None
    ml_init: Optional[QubitParams] = None


@dataclass
class ComparisonTable:
    """Error/Cost summary per initialisation arm, plus the per-case breakdown."""
    arms: Dict[str, ArmStats]
    cases: List[CaseRecord] = field(default_factory=list)
    n_random: int = 0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "arms": {name: stats.to_dict() for name, stats in self.arms.items()},
            "n_random": self.n_random,
            "seed": self.seed,
            "cases": [
                {
                    "case": rec.case.to_dict(),
                    "random": rec.random.to_dict(),
                    "ml": rec.ml.to_dict() if rec.ml else None,
                    "ml_init": rec.ml_init.to_dict() if rec.ml_init else None,
                }
                for rec in self.cases
            ],
        }

    def to_csv(self, path) -> Path:
        """Arm summary first, then one row per case and arm."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["scope", "arm", "e_c", "e_l", "e_j",
                             "error_avg", "error_std", "cost_avg", "cost_std", "n_fits"])
            for name, s in self.arms.items():
                writer.writerow(["all", name, "", "", "", repr(s.error_avg), repr(s.error_std),
                                 repr(s.cost_avg), repr(s.cost_std), s.n_fits])
            for index, rec in enumerate(self.cases):
                arms = [("random", rec.random)] + ([("ml", rec.ml)] if rec.ml else [])
                for name, s in arms:
                    writer.writerow([f"case{index}", name, repr(rec.case.e_c), repr(rec.case.e_l),
                                     repr(rec.case.e_j), repr(s.error_avg), repr(s.error_std),
                                     repr(s.cost_avg), repr(s.cost_std), s.n_fits])
        return path


def compare_random_vs_ml(
    cases: Sequence[QubitParams],
    n_random: int,
    cfg: FitConfig = None,
    model=None,
    seed: int = 0,
    hcfg: HarnessConfig = None,
    ranges: ParamRanges = None,
) -> ComparisonTable:
    """
    Random-initialisation arm vs regressor-initialisation arm.

    Args:
        cases: Ground-truth parameter sets
        n_random: Random inits per case, uniform over the training ranges
        cfg: Fit settings (five iterations by default)
        model: TrainedModel for the ML arm; None runs the random arm only
        seed: Seed of the random inits
        hcfg: Reference flux sampling, ML raster and worker count
        ranges: Ranges of the random inits

    Returns:
        ComparisonTable with AVG/STD of Error and Cost per arm
    """
    cfg = cfg or FitConfig.study_budget()
    hcfg = hcfg or HarnessConfig()
    if n_random < 1:
        raise ConfigError(f"n_random must be at least 1 (got {n_random})")
    rng = init_rng(seed)

    all_random: List[InitOutcome] = []
    all_ml: List[InitOutcome] = []
    records: List[CaseRecord] = []
    for index, case in enumerate(cases):
        reference = reference_spectrum(case, hcfg)
        inits = random_inits(n_random, rng, ranges)
        outcomes = evaluate_inits(case, inits, cfg, hcfg, reference)
        all_random.extend(outcomes)
        record = CaseRecord(case=case, random=ArmStats.from_outcomes(outcomes))
        if model is not None:
            guess = predict(model, ml_input_grid(case, hcfg, model.grid_config))
            ml_outcomes = evaluate_inits(case, [guess], cfg, hcfg, reference)
            all_ml.extend(ml_outcomes)
            record.ml = ArmStats.from_outcomes(ml_outcomes)
            record.ml_init = guess
        records.append(record)
        logger.info(
            f"case {index + 1}/{len(cases)} {case}: random Error {record.random.error_avg:.4f}"
            + (f", ML Error {record.ml.error_avg:.4f}" if record.ml else "")
        )

    arms = {"random": ArmStats.from_outcomes(all_random)}
    if all_ml:
        arms["ml"] = ArmStats.from_outcomes(all_ml)
    return ComparisonTable(arms=arms, cases=records, n_random=n_random, seed=seed)


@dataclass
class ContourData:
    """Error and log10(Cost) over a grid of initial values, indexed [y, x]."""
    axes: Tuple[str, str]
    x_values: np.ndarray
    y_values: np.ndarray
    error: np.ndarray
    log_cost: np.ndarray
    fixed_axis: str
    fixed_value: float
    case: QubitParams

    def argmin_error(self) -> Tuple[float, float]:
        iy, ix = np.unravel_index(int(np.nanargmin(self.error)), self.error.shape)
        return float(self.x_values[ix]), float(self.y_values[iy])

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow([self.axes[0], self.axes[1], "error", "log10_cost"])
            for iy, y in enumerate(self.y_values):
                for ix, x in enumerate(self.x_values):
                    writer.writerow([repr(float(x)), repr(float(y)),
                                     repr(float(self.error[iy, ix])), repr(float(self.log_cost[iy, ix]))])
        return path


def scan_initial_grid(
    case: QubitParams,
    axes: Tuple[str, str],
    grids: Tuple[Sequence[float], Sequence[float]],
    fixed_value: float,
    cfg: FitConfig = None,
    hcfg: HarnessConfig = None,
) -> ContourData:
    """
    Fit from every node of a two-parameter grid of initial values.

    Args:
        case: Ground truth generating the reference spectrum
        axes: Two distinct names out of e_c, e_l, e_j (x axis first)
        grids: Node values for the x and y axes (at least two each)
        fixed_value: Initial value of the remaining parameter
        cfg: Fit settings (five iterations by default)
        hcfg: Reference flux sampling and worker count

    Returns:
        ContourData with Error and floored log10(Cost) per node; nodes outside
        twice the fit bounds (or with a non-positive energy) hold NaN
    """
    cfg = cfg or FitConfig.study_budget()
    hcfg = hcfg or HarnessConfig()
    if len(axes) != 2 or axes[0] == axes[1] or any(a not in AXES for a in axes):
        raise ConfigError(f"axes must be two distinct names out of {AXES} (got {axes})")
    x_values = np.asarray(grids[0], dtype=np.float64)
    y_values = np.asarray(grids[1], dtype=np.float64)
    if x_values.size < 2 or y_values.size < 2:
        raise ConfigError("Scan grids need at least two nodes per axis")
    fixed_axis = next(a for a in AXES if a not in axes)

    bounds = cfg.bounds.scaled(INIT_BOX_FACTOR)
    nodes: List[Optional[QubitParams]] = []
    for y in y_values:
        for x in x_values:
            values = {axes[0]: float(x), axes[1]: float(y), fixed_axis: float(fixed_value)}
            try:
                init = QubitParams(**values)
            except InvalidParameterError:
                init = None
            nodes.append(init if init is not None and bounds.contains(init) else None)
    valid = [init for init in nodes if init is not None]
    if not valid:
        raise ConfigError("No scan node lies inside the allowed initial-value box")
    if len(valid) < len(nodes):
        logger.warning(f"{len(nodes) - len(valid)} scan nodes lie outside the initial-value box; recorded as NaN")
    outcomes = iter(evaluate_inits(case, valid, cfg, hcfg))

    shape = (y_values.size, x_values.size)
    error = np.full(len(nodes), np.nan)
    costs = np.full(len(nodes), np.nan)
    for index, init in enumerate(nodes):
        if init is not None:
            outcome = next(outcomes)
            error[index] = outcome.error
            costs[index] = log_cost(outcome.cost)
    error, costs = error.reshape(shape), costs.reshape(shape)
    logger.info(f"Scanned {len(valid)} initial values over {axes[0]} x {axes[1]} ({fixed_axis}={fixed_value})")
    return ContourData(
        axes=tuple(axes),
        x_values=x_values,
        y_values=y_values,
        error=error,
        log_cost=costs,
        fixed_axis=fixed_axis,
        fixed_value=float(fixed_value),
        case=case,
    )
