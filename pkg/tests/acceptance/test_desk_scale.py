"""
Desk-scale acceptance run: dataset generation, two-stage training, the random-vs-ML
comparison and end-to-end recovery on synthetic devices.

Skipped unless pytest is called with --acceptance; the session fixture trains the
default network on 2048 pure spectra and fine-tunes it on 128 dispersive ones.
"""

import os

import numpy as np
import pytest

from fluxfit import config
from fluxfit.core import QubitParams, transition_frequencies
from fluxfit.data import MANIFEST_NAME, generate_dataset, load_dataset, sample_params, stack_entries
from fluxfit.errors import PipelineError
from fluxfit.fitting import HarnessConfig, compare_random_vs_ml, scan_initial_grid
from fluxfit.labeling import label_points
from fluxfit.model import ModelConfig, TrainConfig, evaluate, evaluate_loss, fine_tune, pretrain
from fluxfit.pipeline import PipelineConfig, characterize_points
from fluxfit.sim import (
    Provenance,
    ReadoutConfig,
    SimConfig,
    dispersive_spectrum,
    perturb_spectrum,
    pure_spectrum,
)

pytestmark = pytest.mark.acceptance

WORKERS = max(1, (os.cpu_count() or 1) - 1)
TRUTH = QubitParams(1.5, 0.7, 6.5)


def within(params: QubitParams, truth: QubitParams, rel: float = 0.05) -> bool:
    return bool(np.all(np.abs(params.as_array() - truth.as_array()) <= rel * truth.as_array()))


@pytest.fixture(scope="session")
def desk(tmp_path_factory):
    """Datasets, pretrained and fine-tuned desk models."""
    root = tmp_path_factory.mktemp("desk")
    sets = {
        "pure": (config.DESK_PURE_COUNT, Provenance.SIMULATED_PURE, 0),
        "dispersive": (config.DESK_DISPERSIVE_COUNT, Provenance.SIMULATED_DISPERSIVE, 1),
        "pure_test": (128, Provenance.SIMULATED_PURE, 2),
        "dispersive_test": (128, Provenance.SIMULATED_DISPERSIVE, 3),
    }
    data = {}
    for name, (count, provenance, seed) in sets.items():
        generate_dataset(root / name, count, provenance, seed=seed, workers=WORKERS)
        data[name] = load_dataset(root / name / MANIFEST_NAME)[1]

    pretrained = pretrain(ModelConfig(), data["pure"], TrainConfig(seed=0))
    tuned = fine_tune(pretrained, data["dispersive"], TrainConfig(seed=0))
    return {"data": data, "pretrained": pretrained, "tuned": tuned}


class TestRegressor:
    """Held-out accuracy and transfer learning."""

    def test_pure_accuracy(self, desk):
        """Mean accuracy on held-out pure spectra is at least 0.85."""
        assert evaluate(desk["pretrained"], desk["data"]["pure_test"]).mean_acc >= 0.85

    def test_dispersive_accuracy(self, desk):
        """The fine-tuned model keeps the bar on held-out dispersive spectra."""
        assert evaluate(desk["tuned"], desk["data"]["dispersive_test"]).mean_acc >= 0.85

    def test_fine_tune_lowers_dispersive_loss(self, desk):
        """Fine-tuning reduces the loss on held-out dispersive spectra."""
        inputs, params = stack_entries(desk["data"]["dispersive_test"])
        losses = []
        for model in (desk["pretrained"], desk["tuned"]):
            dtype = model.network.named_params()[0][1].dtype
            losses.append(evaluate_loss(model.network, inputs.astype(dtype), model.to_targets(params)))
        assert losses[1] < losses[0]


class TestInitialGuessStudies:
    """Random vs ML initial values under the five-iteration budget."""

    def test_ml_beats_random(self, desk):
        """Over 10 cases x 64 random inits the ML arm halves both Error and Cost."""
        cases = sample_params(10, seed=101)
        table = compare_random_vs_ml(cases, 64, model=desk["tuned"], seed=7, hcfg=HarnessConfig(workers=WORKERS))
        random_arm, ml_arm = table.arms["random"], table.arms["ml"]
        assert ml_arm.error_avg <= 0.5 * random_arm.error_avg
        assert ml_arm.cost_avg <= 0.5 * random_arm.cost_avg

    def test_contour_minimum(self):
        """With E_C fixed at 1.28 the Error minimum sits at the node nearest the truth."""
        contour = scan_initial_grid(
            TRUTH, ("e_l", "e_j"), (np.linspace(0.3, 1.1, 9), np.linspace(5.0, 8.0, 9)), 1.28,
            hcfg=HarnessConfig(workers=WORKERS),
        )
        assert contour.argmin_error() == pytest.approx((0.7, 6.5))


class TestEndToEnd:
    """Synthetic devices through the full pipeline with the desk model."""

    def test_round_trip_recovery(self, desk):
        """Noisy dispersive spectra are recovered within 5% on at least 18 of 20 cases."""
        sim, readout = SimConfig(), ReadoutConfig()
        recovered = 0
        for index, case in enumerate(sample_params(20, seed=202)):
            clean = dispersive_spectrum(case, sim, readout)
            noisy = perturb_spectrum(clean, jitter_ghz=0.01, spurious_fraction=0.05, seed=index).unlabeled()
            try:
                report = characterize_points(noisy, model=desk["tuned"], pcfg=PipelineConfig(plots=False))
            except PipelineError:
                continue
            recovered += within(report.fit.params, case)
        assert recovered >= 18

    def test_mirrored_half_period(self, desk):
        """A half-period sweep mirrored about pi is recovered within 5%."""
        clean = dispersive_spectrum(TRUTH, SimConfig(), ReadoutConfig())
        noisy = perturb_spectrum(clean, jitter_ghz=0.01, spurious_fraction=0.05, seed=3)
        half = noisy.derive([p for p in noisy if p.phi_ext <= np.pi]).unlabeled()
        report = characterize_points(half, model=desk["tuned"],
                                     pcfg=PipelineConfig(mirror_about_pi=True, plots=False))
        assert within(report.fit.params, TRUTH)


def test_labeling_exact_on_separated_spectra():
    """Truth-initialized labeling of well-separated noiseless spectra is exact."""
    sim = SimConfig(flux_points=32)
    checked = 0
    for case in sample_params(50, seed=303):
        table = transition_frequencies(case, sim.flux_grid(), sim.transitions)
        near_band = (table > sim.f_min - 0.3) & (table < sim.f_max + 0.3)
        gaps = [np.diff(np.sort(row[keep])) for row, keep in zip(table, near_band)]
        clean = pure_spectrum(case, sim)
        if len(clean) == 0 or min((g.min() for g in gaps if g.size), default=np.inf) <= 0.6:
            continue
        result = label_points(clean.unlabeled(), case)
        assert len(result.outliers) == 0
        assert sorted(result.labeled.points, key=lambda p: p.key()) == sorted(clean.points, key=lambda p: p.key())
        checked += 1
    assert checked > 0


def test_dataset_generation_reproducible(tmp_path):
    """Two seeded generations write byte-identical grid files."""
    for name in ("a", "b"):
        generate_dataset(tmp_path / name, 8, Provenance.SIMULATED_DISPERSIVE, seed=5, workers=WORKERS)
    grids_a = sorted((tmp_path / "a" / "grids").iterdir())
    grids_b = sorted((tmp_path / "b" / "grids").iterdir())
    assert [p.read_bytes() for p in grids_a] == [p.read_bytes() for p in grids_b]
