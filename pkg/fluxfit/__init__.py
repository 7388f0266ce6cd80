"""
fluxfit - fluxonium qubit characterization toolkit.

Provides:
- core: fluxonium Hamiltonian, eigenenergies, transition frequencies, charge matrix elements
- sim: pure and dispersive-readout spectrum simulation, measurement-noise models
- data: seeded training datasets of rasterized spectra
- model: numpy convolutional regressor with two-stage transfer learning
- preprocess: magnitude-map calibration, filtering and wavelet peak extraction
- labeling: transition assignment of measured points
- fitting: least-squares refinement, Error/Cost metrics, initial-guess studies
- pipeline: end-to-end characterization and report figures
- cli: the `fluxfit` command

Subpackages are imported on demand so that the CLI starts without numpy.
"""

from .config import TOOL_VERSION as __version__

__all__ = [
    "config",
    "errors",
    "core",
    "sim",
    "data",
    "model",
    "preprocess",
    "labeling",
    "fitting",
    "pipeline",
    "cli",
]
