"""Characterization pipeline and report figures."""

from .characterize import (
    PipelineConfig,
    PipelineReport,
    characterize_points,
    file_digest,
    preprocess_map,
    run_characterize,
    stage,
)
from .plots import plot_contours, plot_spectrum_overlay

__all__ = [
    "PipelineConfig", "PipelineReport", "characterize_points", "file_digest",
    "preprocess_map", "run_characterize", "stage", "plot_contours", "plot_spectrum_overlay",
]
