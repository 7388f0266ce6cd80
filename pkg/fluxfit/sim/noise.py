"""
Measurement-noise models for synthetic spectra.

Used to build realistic inputs for the characterization pipeline from simulated
point sets: frequency jitter, spurious points, partial spectra and rendered
two-dimensional magnitude maps.
"""

import math

import numpy as np

from ..preprocess.maps import MagnitudeMap
from .points import Provenance, SpectrumPoint, SpectrumPointSet


def perturb_spectrum(
    points: SpectrumPointSet,
    jitter_ghz: float = 0.010,
    spurious_fraction: float = 0.05,
    seed: int = 0,
    f_min: float = None,
    f_max: float = None,
) -> SpectrumPointSet:
    """
    Gaussian frequency jitter plus uniformly scattered spurious points.

    Args:
        points: Clean point set
        jitter_ghz: Standard deviation of the frequency jitter
        spurious_fraction: Spurious points added, as a fraction of len(points)
        seed: RNG seed
        f_min, f_max: Window for spurious points (defaults to the data span)

    Returns:
        Unlabeled point set with provenance "measured"
    """
    rng = np.random.default_rng(seed)
    freqs = points.frequencies
    if f_min is None:
        f_min = float(freqs.min()) if freqs.size else 4.0
    if f_max is None:
        f_max = float(freqs.max()) if freqs.size else 8.0

    jitter = rng.normal(0.0, jitter_ghz, size=len(points)) if jitter_ghz > 0 else np.zeros(len(points))
    noisy = [
        SpectrumPoint(p.phi_ext, float(p.frequency + dj), p.magnitude, None)
        for p, dj in zip(points, jitter)
    ]
    n_spurious = int(round(spurious_fraction * len(points)))
    fluxes = rng.uniform(0.0, 2.0 * math.pi, size=n_spurious)
    spurious_freqs = rng.uniform(f_min, f_max, size=n_spurious)
    noisy.extend(SpectrumPoint(float(phi), float(f)) for phi, f in zip(fluxes, spurious_freqs))
    return points.derive(noisy, Provenance.MEASURED)


def drop_points(points: SpectrumPointSet, fraction: float, seed: int = 0) -> SpectrumPointSet:
    """Randomly remove a fraction of the points (order of the rest preserved)."""
    rng = np.random.default_rng(seed)
    keep = rng.random(len(points)) >= fraction
    return points.derive([p for p, k in zip(points, keep) if k])


def render_magnitude_map(
    points: SpectrumPointSet,
    n_bias: int = 256,
    freq_axis: np.ndarray = None,
    linewidth_ghz: float = 0.02,
    noise_sigma: float = 0.02,
    seed: int = 0,
    resonator_ghz: float = None,
    resonator_height: float = 10.0,
) -> MagnitudeMap:
    """
    Draw Lorentzian lines for every point onto a noisy background.

    The bias axis is phi_ext / pi over one flux period, so FluxMap(0, 1) calibrates it.
    Points are placed in the nearest bias column; line height is the point's magnitude
    (1 when absent). With resonator_ghz set, a flux-independent readout line of
    resonator_height is added; it dominates the map maximum the way the resonator
    response does in measured two-tone maps.
    """
    rng = np.random.default_rng(seed)
    if freq_axis is None:
        freq_axis = np.linspace(4.0, 8.0, 401)
    freq_axis = np.asarray(freq_axis, dtype=np.float64)
    bias_axis = 2.0 * np.arange(n_bias) / n_bias
    half = linewidth_ghz / 2.0

    image = rng.normal(0.0, noise_sigma, size=(freq_axis.size, n_bias)) if noise_sigma > 0 \
        else np.zeros((freq_axis.size, n_bias))
    for p in points:
        column = int(round((p.phi_ext % (2.0 * math.pi)) / (2.0 * math.pi) * n_bias)) % n_bias
        height = 1.0 if p.magnitude is None else float(p.magnitude)
        image[:, column] += height * half ** 2 / ((freq_axis - p.frequency) ** 2 + half ** 2)
    if resonator_ghz is not None:
        line = resonator_height * half ** 2 / ((freq_axis - resonator_ghz) ** 2 + half ** 2)
        image += line[:, None]
    return MagnitudeMap(bias_axis=bias_axis, freq_axis=freq_axis, magnitudes=image)
