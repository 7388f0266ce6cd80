"""Adam optimiser over named numpy parameters."""

from typing import Dict, List, Tuple

import numpy as np


class Adam:
    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: Dict[str, np.ndarray] = {}
        self._v: Dict[str, np.ndarray] = {}

    def step(self, params: List[Tuple[str, np.ndarray]], grads: List[Tuple[str, np.ndarray]]):
        """In-place update; params and grads must be aligned by name."""
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for (name, p), (grad_name, g) in zip(params, grads):
            assert name == grad_name, f"{name} != {grad_name}"
            m = self._m.setdefault(name, np.zeros_like(p))
            v = self._v.setdefault(name, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            p -= update.astype(p.dtype)
