"""
Tests for measured-map preprocessing: calibration, magnitude filter, peak extraction, transforms.
"""

import math

import numpy as np
import pytest

from fluxfit.core import ExternalFlux
from fluxfit.errors import ConfigError, DegenerateBackgroundError, ShapeError
from fluxfit.preprocess import (
    FilterConfig,
    FluxMap,
    MagnitudeMap,
    PeakConfig,
    decimate_flux,
    extract_peaks,
    flux_calibrate,
    load_magnitude_map,
    magnitude_filter,
    mirror_about_pi,
    write_magnitude_map,
)
from fluxfit.sim import SpectrumPoint, SpectrumPointSet

FREQ_AXIS = np.linspace(4.0, 8.0, 201)


def line_map(centers, n_bias=12, width_bins=3.0, noise=0.0, seed=0):
    """Calibrated map with flux-independent Lorentzian lines."""
    rng = np.random.default_rng(seed)
    half = width_bins * (FREQ_AXIS[1] - FREQ_AXIS[0]) / 2.0
    column = sum(half ** 2 / ((FREQ_AXIS - c) ** 2 + half ** 2) for c in centers)
    mags = np.repeat(column[:, None], n_bias, axis=1)
    if noise:
        mags = mags + rng.normal(0.0, noise, mags.shape)
    bias = np.linspace(0.0, 1.0, n_bias)
    return flux_calibrate(MagnitudeMap(bias, FREQ_AXIS, mags), FluxMap(0.0, 1.0))


class TestFluxCalibration:
    """Affine bias -> flux map."""

    def test_increasing(self):
        """Bias 0.5 maps to pi/2 between calibration points 0 and 1."""
        assert FluxMap(0.0, 1.0).to_phi(0.5) == pytest.approx(math.pi / 2)

    def test_decreasing(self):
        """Reversed calibration points are handled."""
        assert FluxMap(2.0, 0.0).to_phi(1.0) == pytest.approx(math.pi / 2)
        assert FluxMap(2.0, 0.0).to_phi(0.0) == pytest.approx(math.pi)

    def test_equal_points(self):
        """Identical calibration biases are a config error."""
        with pytest.raises(ConfigError):
            FluxMap(0.3, 0.3)

    def test_attaches_axis(self):
        """flux_calibrate sets phi_axis."""
        m = MagnitudeMap(np.array([0.0, 0.5, 1.0]), np.array([4.0, 5.0]), np.zeros((2, 3)))
        np.testing.assert_allclose(flux_calibrate(m, FluxMap(0.0, 1.0)).phi_axis, [0.0, math.pi / 2, math.pi])

    def test_shape_checked(self):
        """Magnitudes must match both axes."""
        with pytest.raises(ShapeError):
            MagnitudeMap(np.array([0.0, 1.0]), np.array([4.0, 5.0]), np.zeros((3, 2)))

    def test_map_file_formats(self, tmp_path, temp_test_file):
        """Dense grids round trip; triplet lists are read."""
        m = line_map([5.5], n_bias=4)
        loaded = load_magnitude_map(write_magnitude_map(m, tmp_path / "map.csv"))
        np.testing.assert_allclose(loaded.magnitudes, m.magnitudes)
        triplets = temp_test_file("t.csv", "bias,freq_ghz,magnitude\n0,4,1\n1,4,2\n0,5,3\n1,5,4\n")
        t = load_magnitude_map(triplets)
        np.testing.assert_allclose(t.magnitudes, [[1, 2], [3, 4]])


class TestMagnitudeFilter:
    """Background and upper-bound thresholds."""

    def test_constant_map(self):
        """Zero background variance is an error."""
        m = MagnitudeMap(np.arange(5.0), np.arange(4.0) + 4.0, np.ones((4, 5)))
        with pytest.raises(DegenerateBackgroundError):
            magnitude_filter(m)

    def test_brightest_pixel_excluded(self):
        """A 10 sigma pixel that is also the maximum fails the upper bound."""
        rng = np.random.default_rng(0)
        mags = rng.normal(0.0, 1.0, (64, 128))
        mags[30, 60] = 10.0
        mask = magnitude_filter(MagnitudeMap(np.arange(128.0), np.linspace(4, 8, 64), mags))
        assert not mask[30, 60]

    def test_ridge_passes(self):
        """Ridge at 10 sigma passes with a far brighter pixel elsewhere."""
        rng = np.random.default_rng(1)
        mags = rng.normal(0.0, 1.0, (64, 128))
        mags[:, 40] = 10.0
        mags[5, 100] = 100.0
        mask = magnitude_filter(MagnitudeMap(np.arange(128.0), np.linspace(4, 8, 64), mags))
        assert mask[:, 40].all()
        assert not mask[5, 100]

    def test_scale_invariance(self):
        """Scaling the map by a positive constant leaves the mask unchanged."""
        rng = np.random.default_rng(2)
        mags = rng.normal(0.0, 1.0, (32, 48))
        mags[:, 10] += 6.0
        mags[3, 3] = 60.0
        m = MagnitudeMap(np.arange(48.0), np.linspace(4, 8, 32), mags)
        assert np.array_equal(magnitude_filter(m), magnitude_filter(m.scaled(4.0)))

    def test_background_region(self):
        """An explicit background rectangle sets the threshold."""
        rng = np.random.default_rng(3)
        mags = rng.normal(0.0, 1.0, (20, 20))
        mags[10, 10] = 8.0
        mags[0, 0] = 100.0
        m = MagnitudeMap(np.arange(20.0), np.linspace(4, 8, 20), mags, background_region=(12, 20, 0, 20))
        assert magnitude_filter(m)[10, 10]

    def test_empty_region(self):
        """An empty background region is degenerate."""
        m = MagnitudeMap(np.arange(4.0), np.arange(4.0) + 4.0, np.eye(4), background_region=(2, 2, 0, 4))
        with pytest.raises(DegenerateBackgroundError):
            magnitude_filter(m)

    def test_config_bounds(self):
        """Thresholds are validated."""
        with pytest.raises(ValueError):
            FilterConfig(max_fraction=1.5)


class TestPeakExtraction:
    """Wavelet peaks per flux column."""

    def test_single_line(self):
        """One line at 5.5 GHz gives one point per column within a bin."""
        m = line_map([5.5])
        points = extract_peaks(m, np.ones(m.shape, dtype=bool))
        assert len(points) == m.shape[1]
        np.testing.assert_allclose(points.frequencies, 5.5, atol=FREQ_AXIS[1] - FREQ_AXIS[0])
        assert sorted(set(points.fluxes.tolist())) == sorted(m.phi_axis.tolist())

    def test_two_lines(self):
        """Two separated lines give two points per column."""
        m = line_map([5.0, 6.0])
        points = extract_peaks(m, np.ones(m.shape, dtype=bool))
        assert len(points) == 2 * m.shape[1]
        bin_width = FREQ_AXIS[1] - FREQ_AXIS[0]
        for phi in m.phi_axis:
            freqs = sorted(p.frequency for p in points if p.phi_ext == phi)
            assert freqs == pytest.approx([5.0, 6.0], abs=bin_width)

    def test_masked_column(self):
        """A fully masked column contributes no points."""
        m = line_map([5.5])
        mask = np.ones(m.shape, dtype=bool)
        mask[:, 3] = False
        points = extract_peaks(m, mask)
        assert m.phi_axis[3] not in set(points.fluxes.tolist())
        assert len(points) == m.shape[1] - 1

    def test_sorted_and_measured(self):
        """Points are sorted by flux then frequency and carry normalised magnitudes."""
        m = line_map([5.0, 6.0])
        points = extract_peaks(m, np.ones(m.shape, dtype=bool))
        keys = [(p.phi_ext, p.frequency) for p in points]
        assert keys == sorted(keys)
        assert np.all(points.magnitudes <= 1.0)
        assert all(label is None for label in points.labels)

    def test_deterministic(self):
        """Identical map and config give identical points."""
        m = line_map([5.2, 6.7], noise=0.01, seed=4)
        mask = magnitude_filter(m, FilterConfig(max_fraction=1.0))
        assert extract_peaks(m, mask).points == extract_peaks(m, mask).points

    def test_requires_calibration(self):
        """Uncalibrated maps are rejected."""
        m = MagnitudeMap(np.arange(3.0), FREQ_AXIS, np.zeros((FREQ_AXIS.size, 3)))
        with pytest.raises(ConfigError):
            extract_peaks(m, np.ones(m.shape, dtype=bool))

    def test_mask_shape(self):
        """The mask must match the map."""
        m = line_map([5.5])
        with pytest.raises(ShapeError):
            extract_peaks(m, np.ones((3, 3), dtype=bool))

    def test_widths_validated(self):
        """Wavelet widths must be positive."""
        with pytest.raises(ValueError):
            PeakConfig(wavelet_widths=[0.0, 1.0])


class TestTransforms:
    """Mirror and decimation of point sets."""

    def test_mirror_about_pi(self):
        """Each point gains its image at 2 pi - phi; points at 0 and pi stay single."""
        points = SpectrumPointSet(points=[
            SpectrumPoint(0.0, 5.0), SpectrumPoint(1.0, 5.5), SpectrumPoint(math.pi, 6.0),
            SpectrumPoint(4.0, 7.0),
        ])
        mirrored = mirror_about_pi(points)
        keys = {(round(p.phi_ext, 12), p.frequency) for p in mirrored}
        assert keys == {
            (0.0, 5.0), (1.0, 5.5), (round(2 * math.pi - 1.0, 12), 5.5), (round(math.pi, 12), 6.0),
        }

    def test_mirror_unrestricted(self):
        """restrict=False mirrors every point."""
        points = SpectrumPointSet(points=[SpectrumPoint(4.0, 7.0)])
        mirrored = mirror_about_pi(points, restrict=False)
        assert sorted(p.phi_ext for p in mirrored) == pytest.approx([2 * math.pi - 4.0, 4.0])

    def test_mirror_wraps_flux(self):
        """Fluxes outside [0, 2 pi) are wrapped like ExternalFlux.canonical before mirroring."""
        points = SpectrumPointSet(points=[SpectrumPoint(2 * math.pi + 0.5, 5.0), SpectrumPoint(-0.5, 6.0)])
        mirrored = mirror_about_pi(points)
        assert sorted(p.phi_ext for p in mirrored) == pytest.approx(
            [ExternalFlux(0.5).canonical, ExternalFlux(-0.5).canonical]
        )
        assert set(mirrored.frequencies.tolist()) == {5.0}

    def test_decimate(self):
        """factor 2 keeps every second distinct flux."""
        points = SpectrumPointSet(points=[SpectrumPoint(float(k), 5.0) for k in range(6)])
        assert decimate_flux(points, 2).fluxes.tolist() == [0.0, 2.0, 4.0]
        with pytest.raises(ValueError):
            decimate_flux(points, 0)
