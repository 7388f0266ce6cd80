"""
Regressor architecture: a stack of stride-2 convolution blocks followed by a
fully connected head with three linear outputs (E_C, E_L, E_J).
"""

import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ShapeError
from .layers import Conv2D, Dense, Flatten, Layer, ReLU

logger = logging.getLogger(__name__)


class ConvBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    channels: int = Field(ge=1)
    kernel: int = Field(default=3, ge=1)
    stride: int = Field(default=2, ge=1)


def _default_blocks() -> List[ConvBlock]:
    return [ConvBlock(channels=c) for c in (16, 32, 64, 128)]


class ModelConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    input_dims: Tuple[int, int] = (256, 256)
    conv_blocks: List[ConvBlock] = Field(default_factory=_default_blocks)
    head_widths: List[int] = Field(default_factory=lambda: [64])
    output_dim: int = 3
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.output_dim != 3:
            raise ValueError(f"output_dim must be 3 (got {self.output_dim})")
        if not self.conv_blocks and not self.head_widths:
            raise ValueError("Model needs at least one hidden layer")
        if any(w < 1 for w in self.head_widths):
            raise ValueError(f"head_widths must be positive (got {self.head_widths})")
        if min(self.input_dims) < 1:
            raise ValueError(f"input_dims must be positive (got {self.input_dims})")
        return self


class Network:
    """Sequential layer stack with named parameters ("<index>.<W|b>")."""

    def __init__(self, layers: List[Layer]):
        self.layers = layers

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, training)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    @property
    def last_trainable_index(self) -> int:
        return max(i for i, layer in enumerate(self.layers) if layer.trainable)

    def named_params(self, only_last: bool = False) -> List[Tuple[str, np.ndarray]]:
        """Parameters in layer order; only_last restricts to the final affine layer."""
        last = self.last_trainable_index
        out = []
        for i, layer in enumerate(self.layers):
            if only_last and i != last:
                continue
            for name, value in layer.params().items():
                out.append((f"{i}.{name}", value))
        return out

    def named_grads(self, only_last: bool = False) -> List[Tuple[str, np.ndarray]]:
        last = self.last_trainable_index
        out = []
        for i, layer in enumerate(self.layers):
            if only_last and i != last:
                continue
            for name, value in layer.grads().items():
                out.append((f"{i}.{name}", value))
        return out

    def assign(self, name: str, value: np.ndarray):
        index, attr = name.split(".")
        layer = self.layers[int(index)]
        current = getattr(layer, attr)
        if current.shape != value.shape:
            raise ShapeError(f"Parameter {name} has shape {current.shape}, got {value.shape}")
        setattr(layer, attr, value.astype(current.dtype, copy=True))

    def snapshot(self) -> List[Tuple[str, np.ndarray]]:
        return [(name, value.copy()) for name, value in self.named_params()]

    def restore(self, snapshot: List[Tuple[str, np.ndarray]]):
        for name, value in snapshot:
            self.assign(name, value)


def build_network(cfg: ModelConfig, dtype=np.float32) -> Network:
    """Instantiate the architecture with seeded He-normal weights."""
    rng = np.random.default_rng(cfg.seed)
    layers: List[Layer] = []
    shape = (1, cfg.input_dims[0], cfg.input_dims[1])
    for block in cfg.conv_blocks:
        conv = Conv2D(shape[0], block.channels, block.kernel, block.stride, rng=rng, dtype=dtype)
        shape = conv.output_shape(shape)
        if min(shape[1:]) < 1:
            raise ShapeError(f"Convolution stack collapses input {cfg.input_dims} to {shape}")
        layers += [conv, ReLU()]
    flatten = Flatten()
    layers.append(flatten)
    width = flatten.output_shape(shape)[0]
    for hidden in cfg.head_widths:
        layers += [Dense(width, hidden, rng=rng, dtype=dtype), ReLU()]
        width = hidden
    layers.append(Dense(width, cfg.output_dim, rng=rng, dtype=dtype))
    logger.debug(f"Built network with {len(layers)} layers, {width} -> {cfg.output_dim} head")
    return Network(layers)
