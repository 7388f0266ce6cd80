"""Measured-map preprocessing: calibration, filtering, peak extraction, point transforms."""

from .maps import (
    FluxMap,
    MagnitudeMap,
    flux_calibrate,
    load_magnitude_map,
    write_magnitude_map,
)
from .filtering import BackgroundStats, FilterConfig, background_statistics, magnitude_filter
from .peaks import PeakConfig, column_peaks, extract_peaks
from .transforms import decimate_flux, mirror_about_pi
from ..sim.points import read_points, write_points

__all__ = [
    "FluxMap", "MagnitudeMap", "flux_calibrate", "load_magnitude_map", "write_magnitude_map",
    "BackgroundStats", "FilterConfig", "background_statistics", "magnitude_filter",
    "PeakConfig", "column_peaks", "extract_peaks",
    "decimate_flux", "mirror_about_pi", "read_points", "write_points",
]
