"""Dense layers with optional connectivity masks, plus activations and dropout."""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "softmax", "identity")


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax, max-shifted for overflow safety."""
    shifted = z - z.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    return expz / expz.sum(axis=1, keepdims=True)


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on [-b, b] with b = sqrt(6 / (fan_in + fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def apply_dropout(activations: np.ndarray, rate: float, rng: np.random.Generator):
    """Inverted dropout: zero a ``rate`` fraction, scale survivors by 1/(1-rate).

    Returns ``(dropped, scale)`` where ``scale`` is the multiplicative mask needed
    to replay the same drop pattern in backprop (None when rate is 0).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return activations, None
    keep = rng.random(activations.shape) >= rate
    scale = keep / (1.0 - rate)
    return activations * scale, scale


class DenseLayer:
    """``activation(x @ (W * M) + b)`` with an optional fixed 0/1 connectivity mask M.

    Masked entries of W are held at exactly zero: they are zeroed at
    initialization, their gradient is zeroed, and the optimizer re-applies the
    mask after every update.
    """

    def __init__(self, in_dim: int, out_dim: int, activation: str = "relu", mask=None):
        if in_dim < 1 or out_dim < 1:
            raise ValueError("layer dimensions must be positive")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if mask is not None:
            mask = np.asarray(mask, dtype=np.float64)
            if mask.shape != (in_dim, out_dim):
                raise ValueError(
                    f"mask shape {mask.shape} does not match layer shape {(in_dim, out_dim)}"
                )
            if not np.all((mask == 0.0) | (mask == 1.0)):
                raise ValueError("mask entries must be 0 or 1")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.mask = mask
        self.weight = np.zeros((in_dim, out_dim))
        self.bias = np.zeros(out_dim)

    def init_params(self, rng: np.random.Generator) -> None:
        """Glorot-uniform weights (masked entries zeroed), zero biases.

        Writes in place so references from ``weight``/``bias`` stay valid.
        """
        self.weight[...] = glorot_uniform(self.in_dim, self.out_dim, rng)
        if self.mask is not None:
            self.weight *= self.mask
        self.bias[...] = 0.0

    def effective_weight(self) -> np.ndarray:
        return self.weight if self.mask is None else self.weight * self.mask

    def forward(self, x, training: bool = False, dropout_rate: float = 0.0, rng=None):
        """Return ``(output, cache)``; dropout hits hidden activations only, never softmax."""
        z = x @ self.effective_weight() + self.bias
        if self.activation == "relu":
            out = relu(z)
        elif self.activation == "softmax":
            out = softmax(z)
        else:
            out = z
        drop_scale = None
        if training and dropout_rate > 0.0 and self.activation != "softmax":
            out, drop_scale = apply_dropout(out, dropout_rate, rng)
        return out, (x, z, drop_scale)

    def backward_from_output(self, grad_out, cache):
        """Backprop from dL/d(output); for relu/identity layers."""
        if self.activation == "softmax":
            raise ValueError("softmax layers backpropagate from pre-activations")
        x, z, drop_scale = cache
        if drop_scale is not None:
            grad_out = grad_out * drop_scale
        grad_z = grad_out * (z > 0.0) if self.activation == "relu" else grad_out
        return self._param_grads(grad_z, x)

    def backward_from_preactivation(self, grad_z, cache):
        """Backprop from dL/dz (the fused softmax/cross-entropy gradient)."""
        x, _, _ = cache
        return self._param_grads(grad_z, x)

    def _param_grads(self, grad_z, x):
        grad_w = x.T @ grad_z
        if self.mask is not None:
            grad_w *= self.mask
        grad_b = grad_z.sum(axis=0)
        grad_x = grad_z @ self.effective_weight().T
        return grad_x, grad_w, grad_b
