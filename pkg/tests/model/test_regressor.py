"""
Tests for the spectrum regressor: layers, training stages, inference, metrics and model files.
"""

import dataclasses
import logging

import numpy as np
import pytest

from fluxfit.core import ParamRanges, QubitParams
from fluxfit.data import DatasetEntry, RasterGrid
from fluxfit.errors import ConfigError, DatasetIOError, SchemaError, ShapeError
from fluxfit.model import (
    ConvBlock,
    LearningRatePolicy,
    ModelConfig,
    TrainConfig,
    accuracy,
    build_network,
    decode_model,
    encode_model,
    evaluate,
    fine_tune,
    load_model,
    mse_loss,
    persist_model,
    predict,
    predict_detailed,
    pretrain,
)
from fluxfit.model.training import TrainingStage
from fluxfit.sim import Provenance


def quick_config(**overrides) -> TrainConfig:
    base = dict(batch_size=8, max_epochs=3, patience=3, seed=0)
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="module")
def pretrained(small_entries):
    cfg = ModelConfig(input_dims=(16, 16), conv_blocks=[ConvBlock(channels=4)], head_widths=[16], seed=0)
    return pretrain(cfg, small_entries, quick_config())


def layer_bytes(model, skip_index=None):
    return [(name, value.tobytes()) for name, value in model.network.named_params()
            if skip_index is None or not name.startswith(f"{skip_index}.")]


class TestGradients:
    """Analytic gradients against central differences."""

    def test_every_layer_type(self):
        """Conv, dense and bias gradients match finite differences on a 4-sample batch."""
        cfg = ModelConfig(input_dims=(8, 8), conv_blocks=[ConvBlock(channels=2)], head_widths=[5], seed=1)
        network = build_network(cfg, dtype=np.float64)
        rng = np.random.default_rng(0)
        x = rng.random((4, 1, 8, 8))
        y = rng.random((4, 3))

        _, grad = mse_loss(network.forward(x, training=True), y)
        network.backward(grad)
        analytic = {name: g.copy() for name, g in network.named_grads()}

        step = 1e-4
        for name, value in network.named_params():
            flat = value.reshape(-1)
            for index in rng.choice(flat.size, size=min(6, flat.size), replace=False):
                original = flat[index]
                flat[index] = original + step
                plus, _ = mse_loss(network.forward(x), y)
                flat[index] = original - step
                minus, _ = mse_loss(network.forward(x), y)
                flat[index] = original
                numeric = (plus - minus) / (2 * step)
                exact = analytic[name].reshape(-1)[index]
                assert exact == pytest.approx(numeric, rel=1e-3, abs=1e-7), name

    def test_output_shape(self, small_model_config):
        """The network maps (N, 1, rows, cols) to (N, 3)."""
        network = build_network(small_model_config)
        out = network.forward(np.zeros((2, 1, 16, 16), dtype=np.float32))
        assert out.shape == (2, 3)

    def test_output_dim_fixed(self):
        """The head always predicts three parameters."""
        with pytest.raises(ValueError):
            ModelConfig(output_dim=2)


class TestPretrain:
    """Stage-1 training."""

    def test_provenance(self, pretrained, small_entries):
        """Pretrained models record stage, epochs and loss history."""
        assert pretrained.provenance.stage == TrainingStage.PRETRAINED
        assert pretrained.provenance.epochs == 3
        assert len(pretrained.provenance.val_loss) == 4
        assert pretrained.provenance.n_train == len(small_entries)
        assert pretrained.all_finite()

    def test_seeded_determinism(self, small_entries, small_model_config):
        """Identical inputs give byte-identical models."""
        a = pretrain(small_model_config, small_entries, quick_config(max_epochs=2))
        b = pretrain(small_model_config, small_entries, quick_config(max_epochs=2))
        assert encode_model(a) == encode_model(b)

    def test_constant_target(self, small_entries, small_model_config):
        """A dataset with one shared triple is learned within 1% of each range."""
        target = QubitParams(1.5, 0.7, 6.5)
        entries = [DatasetEntry(target, e.grid, Provenance.SIMULATED_PURE) for e in small_entries]
        tcfg = TrainConfig(batch_size=16, max_epochs=500, patience=500,
                           lr_policy=LearningRatePolicy.FIXED, learning_rate=3e-3, seed=0)
        model = pretrain(small_model_config, entries, tcfg)
        for entry in entries[:4]:
            guess = predict(model, entry.grid).as_array()
            assert np.all(np.abs(guess - target.as_array()) <= 0.01 * ParamRanges().spans)

    def test_training_loss_decreases(self, small_entries, small_model_config):
        """A few epochs lower the training loss."""
        model = pretrain(small_model_config, small_entries, quick_config(max_epochs=20, patience=20))
        assert model.provenance.train_loss[-1] < model.provenance.train_loss[0]

    def test_empty_dataset(self, small_model_config):
        """Pretraining needs data."""
        with pytest.raises(ConfigError):
            pretrain(small_model_config, [], quick_config())

    def test_shape_mismatch(self, small_entries):
        """Grids must match the model input."""
        with pytest.raises(ShapeError):
            pretrain(ModelConfig(input_dims=(32, 32), conv_blocks=[ConvBlock(channels=2)]),
                     small_entries, quick_config())

    def test_fixed_policy_needs_rate(self):
        """lr_policy fixed without a learning_rate is invalid."""
        with pytest.raises(ValueError):
            TrainConfig(lr_policy=LearningRatePolicy.FIXED)


class TestFineTune:
    """Stage-2 training of the final affine layer."""

    def test_backbone_frozen(self, pretrained, small_entries):
        """Every layer but the last is bit-identical after fine-tuning."""
        tuned = fine_tune(pretrained, small_entries[8:], quick_config(max_epochs=4, patience=4))
        last = tuned.network.last_trainable_index
        assert layer_bytes(tuned, skip_index=last) == layer_bytes(pretrained, skip_index=last)
        assert tuned.provenance.stage == TrainingStage.FINE_TUNED
        assert pretrained.provenance.stage == TrainingStage.PRETRAINED

    def test_zero_epochs_identity(self, pretrained, small_entries):
        """Zero epochs leave every parameter unchanged."""
        tuned = fine_tune(pretrained, small_entries, quick_config(max_epochs=0))
        assert layer_bytes(tuned) == layer_bytes(pretrained)

    def test_refine_warns(self, pretrained, small_entries, caplog):
        """Fine-tuning a fine-tuned model logs a warning."""
        tuned = fine_tune(pretrained, small_entries, quick_config(max_epochs=0))
        with caplog.at_level(logging.WARNING):
            fine_tune(tuned, small_entries, quick_config(max_epochs=0))
        assert "already fine-tuned" in caplog.text


class TestPredict:
    """Inference contract."""

    def test_zero_grid_finite(self, pretrained):
        """An empty raster gives a finite, deterministic triple inside the clamp box."""
        grid = RasterGrid(np.zeros((16, 16), dtype=np.float32), pretrained.grid_config)
        first = predict_detailed(pretrained, grid)
        second = predict_detailed(pretrained, grid)
        assert first == second
        box = ParamRanges().scaled(1.25)
        assert np.all(np.isfinite(first.params.as_array()))
        assert np.all(first.params.as_array() >= box.lows) and np.all(first.params.as_array() <= box.highs)

    def test_low_information_warning(self, pretrained, caplog):
        """Sparse rasters log a warning."""
        grid = RasterGrid(np.zeros((16, 16), dtype=np.float32), pretrained.grid_config)
        with caplog.at_level(logging.WARNING):
            predict(pretrained, grid)
        assert "active bins" in caplog.text

    def test_wrong_shape(self, pretrained):
        """Grids of another size are rejected."""
        grid = RasterGrid(np.zeros((8, 8), dtype=np.float32), pretrained.grid_config)
        with pytest.raises(ShapeError):
            predict(pretrained, grid)

    def test_evaluate(self, pretrained, small_entries):
        """evaluate scores every entry."""
        report = evaluate(pretrained, small_entries)
        assert report.n_test == len(small_entries)
        assert len(report.per_sample) == len(small_entries)


class TestAccuracy:
    """Per-axis accuracy 1 - |pred - true| / R."""

    def test_exact(self):
        """Perfect predictions score 1."""
        p = [QubitParams(1.0, 1.0, 4.0), QubitParams(2.0, 0.5, 7.0)]
        report = accuracy(p, p)
        assert (report.acc_e_c, report.acc_e_l, report.acc_e_j, report.mean_acc) == (1.0, 1.0, 1.0, 1.0)

    def test_single_axis_off(self):
        """E_C off by 0.25 GHz gives 0.9 on that axis and 29/30 overall."""
        report = accuracy([QubitParams(1.25, 0.7, 6.5)], [QubitParams(1.5, 0.7, 6.5)])
        assert report.acc_e_c == pytest.approx(0.9)
        assert report.mean_acc == pytest.approx(29 / 30)

    def test_mean_of_axes(self):
        """Mean accuracy is the plain average of the three axes."""
        ranges = ParamRanges()
        truth = QubitParams(1.5, 0.7, 6.5)
        errors = (1 - np.array([0.945, 0.971, 0.953])) * ranges.spans
        pred = QubitParams.from_array(truth.as_array() + errors)
        report = accuracy([pred], [truth])
        assert report.mean_acc == pytest.approx(0.9563, abs=1e-4)

    def test_mismatched_lengths(self):
        """Predictions and truths must pair up."""
        with pytest.raises(ShapeError):
            accuracy([QubitParams(1.0, 1.0, 1.0)], [])

    def test_empty(self):
        """At least one sample is required."""
        with pytest.raises(ShapeError):
            accuracy([], [])


class TestModelFiles:
    """Binary model file format."""

    def test_save_load_save(self, tmp_path, pretrained):
        """Saving a loaded model reproduces the file byte for byte."""
        first = persist_model(pretrained, tmp_path / "a.fxnn")
        second = persist_model(load_model(first), tmp_path / "b.fxnn")
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_model_predicts_identically(self, tmp_path, pretrained, small_entries):
        """Loaded weights give the same prediction."""
        loaded = load_model(persist_model(pretrained, tmp_path / "m.fxnn"))
        assert predict(loaded, small_entries[0].grid) == predict(pretrained, small_entries[0].grid)
        assert loaded.provenance.stage == TrainingStage.PRETRAINED

    def test_float64_network_stored_as_float32(self, pretrained, caplog):
        """Float64 weights are written as float32 with a warning and load back cast."""
        wide = dataclasses.replace(pretrained, network=build_network(pretrained.config, dtype=np.float64))
        with caplog.at_level(logging.WARNING):
            loaded = decode_model(encode_model(wide))
        assert "float64" in caplog.text
        for (name, original), (_, restored) in zip(wide.network.named_params(), loaded.network.named_params()):
            assert restored.dtype == np.float32, name
            assert np.array_equal(restored, original.astype(np.float32)), name

    def test_truncated(self, pretrained):
        """A truncated file is a schema error."""
        blob = encode_model(pretrained)
        for cut in (3, 10, len(blob) // 2, len(blob) - 1):
            with pytest.raises(SchemaError):
                decode_model(blob[:cut])

    def test_trailing_bytes(self, pretrained):
        """Extra bytes after the parameters are rejected."""
        with pytest.raises(SchemaError):
            decode_model(encode_model(pretrained) + b"\x00")

    def test_wrong_magic(self, pretrained):
        """Files must start with the model magic."""
        with pytest.raises(SchemaError):
            decode_model(b"XXXX" + encode_model(pretrained)[4:])

    def test_missing_file(self, tmp_path):
        """A missing model file is an I/O error."""
        with pytest.raises(DatasetIOError):
            load_model(tmp_path / "absent.fxnn")
