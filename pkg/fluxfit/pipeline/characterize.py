"""
End-to-end characterization.

    map -> flux calibration -> magnitude filter -> peak extraction
        -> rasterize -> predict initial guess -> label -> fit -> report

Each stage runs inside stage() so that any failure surfaces as a PipelineError
naming the stage. Intermediate artifacts are written next to report.json.
"""

import hashlib
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from .. import config
from ..core.params import QubitParams
from ..data.raster import rasterize
from ..errors import FluxfitError, PipelineError
from ..fitting.least_squares import FitConfig, FitResult, fit
from ..fitting.metrics import error_metric, cost_metric
from ..labeling.labeler import LabelConfig, LabeledSet, label_points
from ..model.predict import predict_detailed
from ..model.serialization import load_model
from ..model.training import TrainedModel
from ..preprocess.filtering import FilterConfig, magnitude_filter
from ..preprocess.maps import FluxMap, flux_calibrate, load_magnitude_map
from ..preprocess.peaks import PeakConfig, extract_peaks
from ..preprocess.transforms import decimate_flux, mirror_about_pi
from ..sim.configs import SimConfig
from ..sim.points import SpectrumPointSet, write_points
from ..sim.spectrum import pure_spectrum
from .plots import plot_spectrum_overlay

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"
EMPTY_LABEL_HINT = "widen the labeling window or relax the magnitude filter"


class PipelineConfig(BaseModel):
    """Stage configs of one characterization run."""
    model_config = ConfigDict(frozen=True)

    filter: FilterConfig = Field(default_factory=FilterConfig)
    peaks: PeakConfig = Field(default_factory=PeakConfig)
    labeling: LabelConfig = Field(default_factory=LabelConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    mirror_about_pi: bool = False
    decimate: int = Field(default=1, ge=1)
    plots: bool = True


@dataclass
class PipelineReport:
    initial_guess: QubitParams
    guess_source: str
    counts: Dict[str, int]
    fit: FitResult
    metrics: Optional[Dict[str, Any]] = None
    configs: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    tool: Dict[str, str] = field(default_factory=lambda: {
        "name": config.TOOL_NAME, "version": config.TOOL_VERSION,
    })
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self) -> dict:
        return {
            "initial_guess": self.initial_guess.to_dict(),
            "guess_source": self.guess_source,
            "counts": self.counts,
            "fit": self.fit.to_dict(),
            "metrics": self.metrics,
            "configs": self.configs,
            "inputs": self.inputs,
            "artifacts": self.artifacts,
            "diagnostics": self.diagnostics,
            "tool": self.tool,
            "timestamp": self.timestamp,
        }

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path


@contextmanager
def stage(name: str):
    """Re-raise library errors of a stage as PipelineError(name, ...)."""
    try:
        yield
    except PipelineError:
        raise
    except FluxfitError as e:
        raise PipelineError(name, e.message, hint=e.code.name.lower())
    except (OSError, ValueError) as e:
        raise PipelineError(name, str(e))


def file_digest(path) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            sha.update(chunk)
    return f"sha256:{sha.hexdigest()}"


def characterize_points(
    points: SpectrumPointSet,
    model: Optional[TrainedModel] = None,
    pcfg: PipelineConfig = None,
    initial_guess: Optional[QubitParams] = None,
    truth: Optional[QubitParams] = None,
    out_dir=None,
    inputs: Dict[str, str] = None,
    extra_configs: Dict[str, Any] = None,
) -> PipelineReport:
    """
    Point set -> initial guess -> labels -> fit.

    Args:
        points: Measured (unlabeled) points
        model: Trained regressor; not needed when initial_guess is given
        pcfg: Stage configs
        initial_guess: Bypasses the regressor
        truth: Known parameters for Error/Cost metrics (synthetic runs)
        out_dir: Where to write artifacts and report.json (nothing written when None)
        inputs: Input digests to embed
        extra_configs: Upstream configs to echo (calibration, filter)

    Returns:
        PipelineReport
    """
    pcfg = pcfg or PipelineConfig()
    out_dir = Path(out_dir) if out_dir is not None else None
    artifacts: Dict[str, str] = {}
    diagnostics: Dict[str, Any] = {"n_points_in": len(points)}

    with stage("transform"):
        if pcfg.mirror_about_pi:
            points = mirror_about_pi(points)
        if pcfg.decimate > 1:
            points = decimate_flux(points, pcfg.decimate)

    with stage("predict"):
        if initial_guess is not None:
            guess, source = initial_guess, "user"
        elif model is not None:
            prediction = predict_detailed(model, rasterize(points, model.grid_config))
            guess, source = prediction.params, "model"
            diagnostics["n_active_bins"] = prediction.n_active_bins
            diagnostics["guess_clamped"] = prediction.clamped
        else:
            raise PipelineError("predict", "No model and no initial guess", hint="pass --model or --guess")
    logger.info(f"Initial guess ({source}): {guess}")

    with stage("label"):
        labeled: LabeledSet = label_points(points, guess, pcfg.labeling)
    if len(labeled.labeled) == 0:
        raise PipelineError("label", "No point could be labeled", hint=EMPTY_LABEL_HINT)

    with stage("fit"):
        result = fit(labeled, guess, pcfg.fit)

    metrics = None
    if truth is not None:
        with stage("metrics"):
            reference = pure_spectrum(truth, SimConfig())
            metrics = {
                "truth": truth.to_dict(),
                "error": error_metric(result.params, truth),
                "cost": cost_metric(result.params, reference),
                "guess_error": error_metric(guess, truth),
                "relative_deviation": {
                    name: abs(getattr(result.params, name) - getattr(truth, name)) / getattr(truth, name)
                    for name in ("e_c", "e_l", "e_j")
                },
            }

    configs = {"pipeline": pcfg.model_dump(mode="json"), **(extra_configs or {})}
    if model is not None:
        configs["model"] = {
            "architecture": model.config.model_dump(mode="json"),
            "grid": model.grid_config.model_dump(mode="json"),
            "stage": model.provenance.stage.value,
        }

    if out_dir is not None:
        with stage("report"):
            out_dir.mkdir(parents=True, exist_ok=True)
            artifacts["points"] = write_points(points, out_dir / "points.csv").name
            artifacts["labeled"] = write_points(labeled.labeled, out_dir / "labeled.csv").name
            artifacts["outliers"] = write_points(labeled.outliers, out_dir / "outliers.csv").name
            if pcfg.plots:
                artifacts["overlay"] = plot_spectrum_overlay(
                    out_dir / "overlay.png", result.params, labeled.labeled, labeled.outliers,
                    transitions=pcfg.labeling.transitions,
                ).name

    report = PipelineReport(
        initial_guess=guess,
        guess_source=source,
        counts={"points": len(points), **labeled.counts},
        fit=result,
        metrics=metrics,
        configs=configs,
        inputs=inputs or {},
        artifacts=artifacts,
        diagnostics=diagnostics,
    )
    if out_dir is not None:
        report.write(out_dir / REPORT_NAME)
        logger.info(f"Report written to {out_dir / REPORT_NAME}")
    return report


def preprocess_map(magnitude_map, calibration: FluxMap, pcfg: PipelineConfig) -> SpectrumPointSet:
    with stage("preprocess"):
        calibrated = flux_calibrate(magnitude_map, calibration)
        mask = magnitude_filter(calibrated, pcfg.filter)
        return extract_peaks(calibrated, mask, pcfg.peaks)


def run_characterize(
    map_path,
    model_path=None,
    calibration: FluxMap = None,
    pcfg: PipelineConfig = None,
    out_dir=None,
    initial_guess: Optional[QubitParams] = None,
    truth: Optional[QubitParams] = None,
) -> PipelineReport:
    """
    Characterize a device from a measured magnitude map file.

    Args:
        map_path: Dense-grid or triplet map file
        model_path: Model file (optional when initial_guess is given)
        calibration: Bias values at phi_ext = 0 and pi
        pcfg: Stage configs
        out_dir: Artifact directory (defaults to <map dir>/<map stem>_fluxfit)
        initial_guess: Bypasses the regressor
        truth: Known parameters for metrics

    Returns:
        PipelineReport (also written to out_dir/report.json)
    """
    pcfg = pcfg or PipelineConfig()
    map_path = Path(map_path)
    if calibration is None:
        raise PipelineError("load", "Flux calibration is required", hint="pass --bias-zero and --bias-pi")
    out_dir = Path(out_dir) if out_dir is not None else map_path.parent / f"{map_path.stem}_fluxfit"

    with stage("load"):
        magnitude_map = load_magnitude_map(map_path)
        inputs = {"map": file_digest(map_path)}
        model = None
        if model_path is not None:
            model = load_model(model_path)
            inputs["model"] = file_digest(model_path)

    points = preprocess_map(magnitude_map, calibration, pcfg)
    logger.info(f"Preprocessing produced {len(points)} points")
    return characterize_points(
        points,
        model=model,
        pcfg=pcfg,
        initial_guess=initial_guess,
        truth=truth,
        out_dir=out_dir,
        inputs=inputs,
        extra_configs={"calibration": {"bias_at_zero": calibration.bias_at_zero,
                                       "bias_at_pi": calibration.bias_at_pi}},
    )
