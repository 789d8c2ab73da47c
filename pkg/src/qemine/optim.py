"""Adaptive-moment gradient descent over named parameter blocks.

State (first/second moments and step count) is kept per block, so a
block that is frozen for some phase of training keeps its bias
correction consistent when it resumes.
"""

from __future__ import annotations

import numpy as np

from .errors import TrainingError

__all__ = ["Adam"]


class Adam:
    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._state: dict[str, tuple] = {}

    def step(self, params: dict, grads: dict) -> None:
        """Update every block named in grads in place; other blocks stay untouched."""
        for name, grad in grads.items():
            grad = np.asarray(grad, dtype=np.float64)
            if not np.all(np.isfinite(grad)):
                raise TrainingError(f"non-finite gradient in parameter block {name!r}")
            if name in self._state:
                m, v, t = self._state[name]
            else:
                m = np.zeros_like(grad)
                v = np.zeros_like(grad)
                t = 0
            t += 1
            m += (1.0 - self.beta1) * (grad - m)
            v += (1.0 - self.beta2) * (grad * grad - v)
            m_hat = m / (1.0 - self.beta1 ** t)
            v_hat = v / (1.0 - self.beta2 ** t)
            params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)
            self._state[name] = (m, v, t)
