"""
Tests for least-squares refinement, fit metrics and the initial-guess harness.
"""

import csv

import numpy as np
import pytest

from fluxfit.core import ExternalFlux, ParamRanges, QubitParams, transition_frequency
from fluxfit.data import sample_params
from fluxfit.errors import ConfigError
from fluxfit.fitting import (
    FitConfig,
    HarnessConfig,
    MetricReport,
    compare_random_vs_ml,
    cost_metric,
    error_metric,
    evaluate_inits,
    fit,
    init_rng,
    log_cost,
    metric_report,
    numeric_jacobian,
    random_inits,
    reference_spectrum,
    residuals,
    scan_initial_grid,
)
from fluxfit.model import ConvBlock, ModelConfig, TrainConfig, pretrain
from fluxfit.sim import Provenance, SimConfig, SpectrumPoint, SpectrumPointSet, pure_spectrum

HARNESS = HarnessConfig(flux_points=16, ml_input=Provenance.SIMULATED_PURE)


def shifted(points: SpectrumPointSet, offset: float) -> SpectrumPointSet:
    return points.derive([SpectrumPoint(p.phi_ext, p.frequency + offset, p.magnitude, p.label) for p in points])


@pytest.fixture(scope="module")
def reference():
    return pure_spectrum(QubitParams(1.5, 0.7, 6.5), SimConfig(flux_points=64))


@pytest.fixture(scope="module")
def coarse_reference():
    return pure_spectrum(QubitParams(1.5, 0.7, 6.5), SimConfig(flux_points=16))


class TestResiduals:
    """Model minus measured frequencies."""

    def test_zero_at_truth(self, reference_params, coarse_reference):
        """Residuals vanish at the generating parameters."""
        assert np.max(np.abs(residuals(coarse_reference, reference_params))) < 1e-9

    def test_constant_shift(self, reference_params, coarse_reference):
        """Raising every measurement by 0.1 GHz gives residuals of -0.1."""
        r = residuals(shifted(coarse_reference, 0.1), reference_params)
        np.testing.assert_allclose(r, -0.1, atol=1e-9)

    def test_mislabeled_point(self, reference_params):
        """A 0-1 point labeled 0-2 leaves the gap between the two transitions."""
        flux = ExternalFlux(1.0)
        f01 = transition_frequency(reference_params, flux, 0, 1)
        f02 = transition_frequency(reference_params, flux, 0, 2)
        points = SpectrumPointSet(points=[SpectrumPoint(1.0, f01, None, (0, 2))])
        assert residuals(points, reference_params)[0] == pytest.approx(f02 - f01, abs=1e-9)

    def test_requires_labels(self, reference_params):
        """Unlabeled points cannot be fitted."""
        with pytest.raises(ConfigError):
            residuals(SpectrumPointSet(points=[SpectrumPoint(1.0, 5.0)]), reference_params)

    def test_jacobian_step_stable(self, reference_params, coarse_reference):
        """Forward differences at two step sizes agree."""
        a = numeric_jacobian(coarse_reference, reference_params, step=1e-5)
        b = numeric_jacobian(coarse_reference, reference_params, step=1e-7)
        assert a.shape == (len(coarse_reference), 3)
        np.testing.assert_allclose(a, b, rtol=1e-3, atol=1e-3 * np.max(np.abs(a)))


class TestFit:
    """Levenberg-Marquardt refinement."""

    def test_start_at_truth(self, reference_params, coarse_reference):
        """Starting at the answer converges at once."""
        result = fit(coarse_reference, reference_params)
        assert result.converged
        assert result.rss < 1e-12
        assert result.n_iterations <= 5
        assert result.params.as_array() == pytest.approx(reference_params.as_array(), abs=1e-9)

    def test_five_iteration_recovery(self, reference_params, reference):
        """A nearby guess is refined within five iterations."""
        result = fit(reference, QubitParams(1.28, 0.67, 7.05), FitConfig.study_budget())
        assert result.n_iterations <= 5
        assert error_metric(result.params, reference_params) < 0.01
        assert cost_metric(result.params, reference) < 1e-4

    def test_rss_history_monotone(self, coarse_reference):
        """Accepted steps never raise the residual sum of squares."""
        history = fit(coarse_reference, QubitParams(1.3, 0.8, 6.0)).rss_history
        assert all(b <= a for a, b in zip(history, history[1:]))

    def test_underdetermined(self, reference_params):
        """Fewer than three points is flagged and never reported as converged."""
        f01 = transition_frequency(reference_params, ExternalFlux(0.0), 0, 1)
        points = SpectrumPointSet(points=[SpectrumPoint(0.0, f01, None, (0, 1))])
        result = fit(points, QubitParams(1.4, 0.8, 6.0))
        assert "underdetermined" in result.flags
        assert not result.converged

    def test_init_outside_box(self, coarse_reference):
        """Initial guesses beyond twice the bounds are rejected."""
        with pytest.raises(ConfigError):
            fit(coarse_reference, QubitParams(50.0, 0.7, 6.5))

    def test_per_transition_stats(self, reference_params, coarse_reference):
        """Per-transition residual statistics cover every labeled point."""
        result = fit(coarse_reference, reference_params)
        assert sum(s["n"] for s in result.per_transition.values()) == len(coarse_reference)
        assert result.to_dict()["converged"] is True

    def test_pinned_at_bound_not_converged(self, monkeypatch, coarse_reference):
        """A rejected step held at the bounds on every axis is not reported as converged."""
        bounds = FitConfig().bounds
        target = bounds.highs * 1.5

        class OutwardResiduals:
            def __init__(self, labeled, basis_dim):
                pass

            def __len__(self):
                return 3

            def __call__(self, params):
                return params.as_array() - target

            def per_transition(self, r):
                return {}

        monkeypatch.setattr("fluxfit.fitting.least_squares.SpectrumResiduals", OutwardResiduals)
        result = fit(coarse_reference, QubitParams.from_array(bounds.highs))
        assert not result.converged
        assert "clamped" in result.flags
        assert result.params.as_array() == pytest.approx(bounds.highs)

    def test_study_budget(self):
        """The study budget caps the iteration budget at five."""
        assert FitConfig.study_budget().max_iterations == 5
        assert FitConfig.study_budget(max_iterations=7).max_iterations == 7


class TestMetrics:
    """Error and Cost."""

    def test_error_zero(self, reference_params):
        assert error_metric(reference_params, reference_params) == 0.0

    def test_error_tenth_of_range(self, reference_params):
        """Every parameter off by 10% of its range gives Error 0.1."""
        est = QubitParams.from_array(reference_params.as_array() + 0.1 * ParamRanges().spans)
        assert error_metric(est, reference_params) == pytest.approx(0.1)

    def test_cost_of_offset(self, reference_params, coarse_reference):
        """A uniform 0.05 GHz discrepancy costs 0.0025 GHz^2."""
        assert cost_metric(reference_params, shifted(coarse_reference, 0.05)) == pytest.approx(0.0025, rel=1e-6)

    def test_rms_mhz(self):
        """Cost 0.001 GHz^2 is about 31.6 MHz RMS."""
        assert MetricReport(error=0.0, cost=0.001, n_points=1).rms_mhz == pytest.approx(31.62, abs=0.01)

    def test_metric_report(self, reference_params, coarse_reference):
        """The report bundles Error, Cost and the reference size."""
        report = metric_report(reference_params, reference_params, shifted(coarse_reference, 0.05))
        assert report.error == 0.0
        assert report.cost == pytest.approx(0.0025, rel=1e-6)
        assert report.rms_mhz == pytest.approx(50.0, rel=1e-6)
        assert report.to_dict()["n_points"] == len(coarse_reference)

    def test_log_cost_floor(self):
        """Exact fits map to the floor instead of -inf."""
        assert log_cost(0.0) == -18.0
        assert log_cost(1e-30) == -18.0
        assert log_cost(1e-4) == pytest.approx(-4.0)


class TestHarness:
    """Random vs ML initialisation and initial-value scans."""

    def test_init_at_truth(self, reference_params):
        """Fitting from the truth scores zero Error and Cost."""
        outcome = evaluate_inits(reference_params, [reference_params], hcfg=HARNESS)[0]
        assert outcome.error == pytest.approx(0.0, abs=1e-9)
        assert outcome.cost < 1e-18

    def test_reference_spectrum(self, reference_params):
        """The reference is labeled and sampled on the harness flux grid."""
        points = reference_spectrum(reference_params, HARNESS)
        assert points.is_fully_labeled()
        assert set(np.unique(points.fluxes)) <= set(SimConfig(flux_points=16).flux_grid())

    def test_random_arm_deterministic(self, reference_params):
        """Same seed gives identical tables."""
        a = compare_random_vs_ml([reference_params], 2, seed=4, hcfg=HARNESS)
        b = compare_random_vs_ml([reference_params], 2, seed=4, hcfg=HARNESS)
        assert a.to_dict() == b.to_dict()
        assert list(a.arms) == ["random"]
        assert a.arms["random"].n_fits == 2

    def test_parallel_matches_serial(self, reference_params):
        """Worker count does not change results."""
        serial = compare_random_vs_ml([reference_params], 3, seed=1, hcfg=HARNESS)
        parallel = compare_random_vs_ml([reference_params], 3, seed=1,
                                        hcfg=HARNESS.model_copy(update={"workers": 3}))
        assert serial.to_dict() == parallel.to_dict()

    def test_needs_random_inits(self, reference_params):
        with pytest.raises(ConfigError):
            compare_random_vs_ml([reference_params], 0, hcfg=HARNESS)

    def test_ml_arm(self, reference_params, small_entries, tmp_path):
        """A model adds an ML arm with one fit per case."""
        cfg = ModelConfig(input_dims=(16, 16), conv_blocks=[ConvBlock(channels=2)], head_widths=[8], seed=0)
        model = pretrain(cfg, small_entries, TrainConfig(batch_size=8, max_epochs=1, patience=1, seed=0))
        table = compare_random_vs_ml([reference_params], 1, model=model, seed=0, hcfg=HARNESS)
        assert set(table.arms) == {"random", "ml"}
        assert table.arms["ml"].n_fits == 1
        assert table.cases[0].ml_init is not None

        rows = list(csv.reader(table.to_csv(tmp_path / "compare.csv").read_text().splitlines()))
        assert rows[0][:2] == ["scope", "arm"]
        assert [row[1] for row in rows[1:3]] == ["random", "ml"]

    def test_scan_far_from_truth(self, reference_params):
        """Every node of a distant grid gives a finite, nonzero Error."""
        contour = scan_initial_grid(reference_params, ("e_l", "e_j"), ([1.6, 1.9], [2.5, 3.0]), 2.8, hcfg=HARNESS)
        assert contour.error.shape == (2, 2)
        assert np.all(np.isfinite(contour.error)) and np.all(contour.error > 0)
        assert np.all(np.isfinite(contour.log_cost))
        assert contour.fixed_axis == "e_c"

    def test_scan_hits_truth(self, reference_params, tmp_path):
        """The node at the truth is the Error minimum and sits at the Cost floor."""
        contour = scan_initial_grid(reference_params, ("e_l", "e_j"), ([0.7, 1.0], [6.5, 7.5]), 1.5, hcfg=HARNESS)
        assert contour.argmin_error() == (0.7, 6.5)
        assert contour.error[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert contour.log_cost[0, 0] == -18.0

        rows = list(csv.reader(contour.to_csv(tmp_path / "scan.csv").read_text().splitlines()))
        assert rows[0] == ["e_l", "e_j", "error", "log10_cost"]
        assert len(rows) == 5

    def test_random_inits_independent_of_cases(self):
        """Cases and random inits drawn with the same seed never coincide."""
        cases = sample_params(3, seed=3)
        inits = random_inits(3, init_rng(3))
        assert not any(np.allclose(c.as_array(), i.as_array()) for c in cases for i in inits)

    def test_scan_records_nan_outside_box(self, reference_params):
        """Nodes the fitter cannot start from hold NaN while the rest are fitted."""
        contour = scan_initial_grid(reference_params, ("e_l", "e_j"), ([0.0, 0.7], [6.5, 40.0]), 1.5, hcfg=HARNESS)
        assert np.isnan(contour.error[0, 0])
        assert np.all(np.isnan(contour.error[1]))
        assert np.all(np.isnan(contour.log_cost[1]))
        assert contour.error[0, 1] == pytest.approx(0.0, abs=1e-6)
        assert contour.argmin_error() == pytest.approx((0.7, 6.5))

    def test_scan_without_valid_nodes(self, reference_params):
        """A grid with no usable node is a config error."""
        with pytest.raises(ConfigError):
            scan_initial_grid(reference_params, ("e_l", "e_j"), ([40.0, 50.0], [6.5, 7.0]), 1.5, hcfg=HARNESS)

    def test_scan_validation(self, reference_params):
        """Axes must be distinct known names and grids need two nodes."""
        with pytest.raises(ConfigError):
            scan_initial_grid(reference_params, ("e_l", "e_l"), ([1, 2], [1, 2]), 1.5, hcfg=HARNESS)
        with pytest.raises(ConfigError):
            scan_initial_grid(reference_params, ("e_l", "x"), ([1, 2], [1, 2]), 1.5, hcfg=HARNESS)
        with pytest.raises(ConfigError):
            scan_initial_grid(reference_params, ("e_l", "e_j"), ([1.0], [1, 2]), 1.5, hcfg=HARNESS)
