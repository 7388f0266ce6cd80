"""
Neural network layers in numpy.

Each layer caches what its backward pass needs during forward(training=True).
Arrays are NCHW for convolutions and (N, features) for dense layers.
"""

from typing import Dict, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Layer:
    """Base layer: stateless identity."""

    trainable = False

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return grad

    def params(self) -> Dict[str, np.ndarray]:
        return {}

    def grads(self) -> Dict[str, np.ndarray]:
        return {}

    def output_shape(self, input_shape):
        return input_shape


class Conv2D(Layer):
    """2D convolution with square kernel, zero padding kernel // 2."""

    trainable = True

    def __init__(self, in_channels: int, out_channels: int, kernel: int = 3, stride: int = 2,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.kernel = kernel
        self.stride = stride
        self.padding = kernel // 2
        fan_in = in_channels * kernel * kernel
        self.W = (rng.standard_normal((out_channels, in_channels, kernel, kernel))
                  * np.sqrt(2.0 / fan_in)).astype(dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._windows = None
        self._padded_shape = None

    def _windows_of(self, x: np.ndarray) -> np.ndarray:
        p = self.padding
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        self._padded_shape = xp.shape
        windows = sliding_window_view(xp, (self.kernel, self.kernel), axis=(2, 3))
        return windows[:, :, ::self.stride, ::self.stride]

    def forward(self, x, training=False):
        windows = self._windows_of(x)
        if training:
            self._windows = windows
        # (N, C, Ho, Wo, k, k) x (O, C, k, k) -> (N, Ho, Wo, O)
        out = np.tensordot(windows, self.W, axes=([1, 4, 5], [1, 2, 3]))
        return out.transpose(0, 3, 1, 2) + self.b[None, :, None, None]

    def backward(self, grad):
        windows = self._windows
        self.dW = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3])).astype(self.W.dtype)
        self.db = grad.sum(axis=(0, 2, 3)).astype(self.b.dtype)

        # (N, O, Ho, Wo) x (O, C, k, k) -> (N, Ho, Wo, C, k, k)
        dwin = np.tensordot(grad, self.W, axes=([1], [0]))
        n, c, hp, wp = self._padded_shape
        ho, wo = grad.shape[2], grad.shape[3]
        s = self.stride
        dxp = np.zeros((n, c, hp, wp), dtype=grad.dtype)
        for i in range(self.kernel):
            for j in range(self.kernel):
                dxp[:, :, i:i + s * ho:s, j:j + s * wo:s] += dwin[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        p = self.padding
        return dxp[:, :, p:hp - p, p:wp - p] if p else dxp

    def params(self):
        return {"W": self.W, "b": self.b}

    def grads(self):
        return {"W": self.dW, "b": self.db}

    def output_shape(self, input_shape):
        c, h, w = input_shape
        hp, wp = h + 2 * self.padding, w + 2 * self.padding
        return (self.W.shape[0], (hp - self.kernel) // self.stride + 1, (wp - self.kernel) // self.stride + 1)


class ReLU(Layer):
    def forward(self, x, training=False):
        if training:
            self._mask = x > 0
        return np.maximum(x, 0)

    def backward(self, grad):
        return grad * self._mask


class Flatten(Layer):
    def forward(self, x, training=False):
        if training:
            self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._shape)

    def output_shape(self, input_shape):
        return (int(np.prod(input_shape)),)


class Dense(Layer):
    """Affine layer y = x W + b."""

    trainable = True

    def __init__(self, in_features: int, out_features: int,
                 rng: Optional[np.random.Generator] = None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.W = (rng.standard_normal((in_features, out_features))
                  * np.sqrt(2.0 / in_features)).astype(dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)

    def forward(self, x, training=False):
        if training:
            self._x = x
        return x @ self.W + self.b

    def backward(self, grad):
        self.dW = (self._x.T @ grad).astype(self.W.dtype)
        self.db = grad.sum(axis=0).astype(self.b.dtype)
        return grad @ self.W.T

    def params(self):
        return {"W": self.W, "b": self.b}

    def grads(self):
        return {"W": self.dW, "b": self.db}

    def output_shape(self, input_shape):
        return (self.W.shape[1],)
