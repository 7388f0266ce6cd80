"""
Two-stage training of the spectrum regressor.

Stage 1 (pretrain) fits every layer on pure-spectrum rasters. Stage 2
(fine_tune) freezes everything except the final affine layer and adapts it
to dispersive-readout rasters.

Loss: mean over samples of the mean squared error over the three targets,
computed on range-normalised targets unless normalize_targets is off.
"""

import copy
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import config
from ..core.params import ParamRanges
from ..data.raster import GridConfig
from ..data.sampling import split_indices
from ..data.storage import DatasetEntry, load_dataset, stack_entries
from ..errors import ConfigError, ShapeError, TrainingDivergenceError
from .network import ModelConfig, Network, build_network
from .optim import Adam

logger = logging.getLogger(__name__)

EVAL_BATCH = 64


class LearningRatePolicy(Enum):
    ADAPTIVE = "adaptive"
    FIXED = "fixed"


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    batch_size: int = Field(default=32, ge=1)
    max_epochs: int = Field(default=40, ge=0)
    patience: int = Field(default=10, ge=1)
    lr_policy: LearningRatePolicy = LearningRatePolicy.ADAPTIVE
    learning_rate: Optional[float] = Field(default=None, gt=0)
    validation_fraction: float = Field(default=0.1, gt=0, le=0.5)
    normalize_targets: bool = True
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.lr_policy == LearningRatePolicy.FIXED and self.learning_rate is None:
            raise ValueError("lr_policy 'fixed' needs a learning_rate")
        return self

    @property
    def step_size(self) -> float:
        if self.lr_policy == LearningRatePolicy.FIXED:
            return self.learning_rate
        return config.DEFAULT_LEARNING_RATE


class TrainingStage(Enum):
    PRETRAINED = "pretrained"
    FINE_TUNED = "fine_tuned"


@dataclass
class TrainingProvenance:
    stage: TrainingStage
    epochs: int
    final_loss: float
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    n_train: int = 0

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "epochs": self.epochs,
            "final_loss": self.final_loss,
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
            "n_train": self.n_train,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingProvenance":
        return cls(
            stage=TrainingStage(data["stage"]),
            epochs=int(data["epochs"]),
            final_loss=float(data["final_loss"]),
            train_loss=[float(v) for v in data.get("train_loss", [])],
            val_loss=[float(v) for v in data.get("val_loss", [])],
            n_train=int(data.get("n_train", 0)),
        )


@dataclass
class TrainedModel:
    """Network weights plus everything needed to turn outputs into GHz."""
    network: Network
    config: ModelConfig
    target_normalization: ParamRanges
    provenance: TrainingProvenance
    grid_config: GridConfig = field(default_factory=GridConfig)
    targets_normalized: bool = True

    def to_targets(self, params: np.ndarray) -> np.ndarray:
        return self.target_normalization.normalize(params) if self.targets_normalized else params

    def from_outputs(self, outputs: np.ndarray) -> np.ndarray:
        outputs = np.asarray(outputs, dtype=np.float64)
        return self.target_normalization.denormalize(outputs) if self.targets_normalized else outputs

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for _, v in self.network.named_params())


DatasetLike = Union[str, Path, Sequence[DatasetEntry]]


def _resolve(dataset: DatasetLike, ranges: Optional[ParamRanges]):
    if isinstance(dataset, (str, Path)):
        manifest, entries = load_dataset(dataset)
        return entries, ranges or manifest.ranges, manifest.grid_config
    entries = list(dataset)
    grid = entries[0].grid.grid_config if entries else GridConfig()
    return entries, ranges or ParamRanges(), grid


def mse_loss(outputs: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """(mean over samples and axes of squared error, gradient wrt outputs)."""
    diff = outputs.astype(np.float64) - targets
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, grad.astype(outputs.dtype)


def evaluate_loss(network: Network, inputs: np.ndarray, targets: np.ndarray) -> float:
    if len(inputs) == 0:
        return float("nan")
    total = 0.0
    for start in range(0, len(inputs), EVAL_BATCH):
        out = network.forward(inputs[start:start + EVAL_BATCH])
        diff = out.astype(np.float64) - targets[start:start + EVAL_BATCH]
        total += float(np.sum(diff * diff))
    return total / targets.size


def _check_inputs(inputs: np.ndarray, cfg: ModelConfig):
    if tuple(inputs.shape[2:]) != tuple(cfg.input_dims):
        raise ShapeError(
            f"Dataset grids are {tuple(inputs.shape[2:])}, model expects {tuple(cfg.input_dims)}"
        )


def _fit(network: Network, inputs: np.ndarray, targets: np.ndarray, tcfg: TrainConfig,
         only_last: bool) -> Tuple[List[float], List[float], int]:
    """Mini-batch Adam with validation early stopping; restores the best weights."""
    train_idx, val_idx = split_indices(len(inputs), tcfg.validation_fraction, tcfg.seed)
    if len(val_idx) == 0:
        val_idx = train_idx
    x_val, y_val = inputs[val_idx], targets[val_idx]

    optimizer = Adam(tcfg.step_size)
    rng = np.random.default_rng(tcfg.seed + 1)

    train_hist = [evaluate_loss(network, inputs[train_idx], targets[train_idx])]
    val_hist = [evaluate_loss(network, x_val, y_val)]
    if not np.isfinite(train_hist[0]):
        raise TrainingDivergenceError("Initial loss is not finite", epoch=0)
    best_val, best_epoch, best = val_hist[0], 0, network.snapshot()
    stale = 0
    epochs_run = 0

    for epoch in range(1, tcfg.max_epochs + 1):
        order = rng.permutation(train_idx)
        weighted = 0.0
        for start in range(0, len(order), tcfg.batch_size):
            batch = order[start:start + tcfg.batch_size]
            out = network.forward(inputs[batch], training=True)
            loss, grad = mse_loss(out, targets[batch])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(f"Non-finite loss at epoch {epoch}", epoch=epoch)
            network.backward(grad)
            optimizer.step(network.named_params(only_last), network.named_grads(only_last))
            weighted += loss * len(batch)
        epochs_run = epoch
        train_hist.append(weighted / len(order))
        val_loss = evaluate_loss(network, x_val, y_val)
        if not np.isfinite(val_loss):
            raise TrainingDivergenceError(f"Non-finite validation loss at epoch {epoch}", epoch=epoch)
        val_hist.append(val_loss)
        logger.info(f"epoch {epoch}: train_loss={train_hist[-1]:.6g} val_loss={val_loss:.6g}")

        if val_loss < best_val:
            best_val, best_epoch, best = val_loss, epoch, network.snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= tcfg.patience:
                logger.info(f"Early stopping at epoch {epoch} (best epoch {best_epoch})")
                break

    network.restore(best)
    return train_hist, val_hist, epochs_run


def pretrain(
    cfg: ModelConfig,
    dataset: DatasetLike,
    tcfg: TrainConfig = None,
    ranges: ParamRanges = None,
    dtype=np.float32,
) -> TrainedModel:
    """
    Train a fresh network on a pure-spectrum dataset.

    Args:
        cfg: Architecture
        dataset: Manifest path or in-memory entries
        tcfg: Training settings
        ranges: Target normalisation (defaults to the manifest's sampling ranges)
        dtype: Parameter dtype

    Returns:
        TrainedModel at stage pretrained
    """
    tcfg = tcfg or TrainConfig()
    entries, ranges, grid = _resolve(dataset, ranges)
    if not entries:
        raise ConfigError("Cannot pretrain on an empty dataset")
    inputs, params = stack_entries(entries)
    _check_inputs(inputs, cfg)

    network = build_network(cfg, dtype=dtype)
    model = TrainedModel(
        network=network,
        config=cfg,
        target_normalization=ranges,
        provenance=TrainingProvenance(TrainingStage.PRETRAINED, 0, float("nan")),
        grid_config=grid,
        targets_normalized=tcfg.normalize_targets,
    )
    targets = model.to_targets(params)
    logger.info(f"Pretraining on {len(entries)} entries (lr={tcfg.step_size}, batch={tcfg.batch_size})")
    train_hist, val_hist, epochs = _fit(network, inputs.astype(dtype), targets, tcfg, only_last=False)
    model.provenance = TrainingProvenance(
        stage=TrainingStage.PRETRAINED,
        epochs=epochs,
        final_loss=min(val_hist),
        train_loss=train_hist,
        val_loss=val_hist,
        n_train=len(entries),
    )
    return model


def fine_tune(model: TrainedModel, dataset: DatasetLike, tcfg: TrainConfig = None) -> TrainedModel:
    """
    Adapt the final affine layer on a dispersive dataset; all other layers stay bit-identical.

    Returns a new TrainedModel; the input model is not modified.
    """
    tcfg = tcfg or TrainConfig()
    if model.provenance.stage == TrainingStage.FINE_TUNED:
        logger.warning("Model is already fine-tuned; fine-tuning again")
    entries, _, _ = _resolve(dataset, model.target_normalization)
    if not entries:
        raise ConfigError("Cannot fine-tune on an empty dataset")
    inputs, params = stack_entries(entries)
    _check_inputs(inputs, model.config)

    tuned = copy.deepcopy(model)
    targets = tuned.to_targets(params)
    dtype = tuned.network.named_params()[0][1].dtype
    logger.info(f"Fine-tuning final layer on {len(entries)} entries")
    train_hist, val_hist, epochs = _fit(tuned.network, inputs.astype(dtype), targets, tcfg, only_last=True)
    tuned.provenance = TrainingProvenance(
        stage=TrainingStage.FINE_TUNED,
        epochs=epochs,
        final_loss=min(val_hist),
        train_loss=train_hist,
        val_loss=val_hist,
        n_train=len(entries),
    )
    return tuned
