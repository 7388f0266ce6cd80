"""Spectrum simulation: pure transition spectra, dispersive readout, noise models."""

from .points import (
    Provenance,
    SpectrumPoint,
    SpectrumPointSet,
    format_label,
    parse_label,
    read_points,
    write_points,
)
from .configs import ReadoutConfig, SimConfig
from .spectrum import pure_spectrum
from .readout import dispersive_pull, dispersive_shifts, dispersive_spectrum
from .noise import drop_points, perturb_spectrum, render_magnitude_map

__all__ = [
    "Provenance", "SpectrumPoint", "SpectrumPointSet", "format_label", "parse_label",
    "read_points", "write_points", "ReadoutConfig", "SimConfig", "pure_spectrum",
    "dispersive_pull", "dispersive_shifts", "dispersive_spectrum",
    "drop_points", "perturb_spectrum", "render_magnitude_map",
]
