"""Adam optimizer with post-update connectivity re-masking."""

from __future__ import annotations

import numpy as np


class Adam:
    """Adam with bias-corrected moments; updates parameters in place.

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), with
    m_hat = m / (1 - beta1^t) and v_hat = v / (1 - beta2^t). When a parameter
    has a connectivity mask, the mask is re-applied after the update so pruned
    entries stay exactly zero.
    """

    def __init__(self, params, learning_rate: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if learning_rate < 0.0:
            raise ValueError(f"learning_rate must be non-negative, got {learning_rate}")
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        self.params = list(params)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads, masks=None) -> None:
        if len(grads) != len(self.params):
            raise ValueError(f"expected {len(self.params)} gradients, got {len(grads)}")
        if masks is not None and len(masks) != len(self.params):
            raise ValueError(f"expected {len(self.params)} masks, got {len(masks)}")
        self.t += 1
        correct1 = 1.0 - self.beta1 ** self.t
        correct2 = 1.0 - self.beta2 ** self.t
        for i, (param, grad) in enumerate(zip(self.params, grads)):
            m = self.m[i]
            v = self.v[i]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            param -= self.learning_rate * (m / correct1) / (np.sqrt(v / correct2) + self.eps)
            if masks is not None and masks[i] is not None:
                param *= masks[i]
