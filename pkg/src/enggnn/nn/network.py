"""Networks assembled from dense layers: a single chain and a two-branch variant.

Both networks end in a softmax layer trained with categorical cross-entropy;
``backward`` uses the fused gradient (probs - onehot) / n at the output
pre-activations. Parameters and their gradients travel as flat lists ordered
[weight, bias] per layer so the optimizer can stay structure-agnostic.
"""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-12


def cross_entropy(probs: np.ndarray, onehot: np.ndarray) -> float:
    """Mean categorical cross-entropy with probabilities clipped at 1e-12."""
    clipped = np.clip(probs, PROB_FLOOR, 1.0)
    return float(-(onehot * np.log(clipped)).sum() / probs.shape[0])


def _check_chain(layers) -> None:
    if not layers:
        raise ValueError("need at least one layer")
    for prev, nxt in zip(layers, layers[1:]):
        if prev.out_dim != nxt.in_dim:
            raise ValueError(
                f"adjacent layers do not chain: {prev.out_dim} -> {nxt.in_dim}"
            )


def _stack_forward(layers, x, training, dropout_rate, rng):
    caches = []
    out = x
    for layer in layers:
        out, cache = layer.forward(out, training=training, dropout_rate=dropout_rate, rng=rng)
        caches.append(cache)
    return out, caches


def _stack_backward(layers, caches, grad_out):
    """Backprop through non-softmax layers; returns (grad wrt input, per-layer grads)."""
    grads = []
    grad = grad_out
    for layer, cache in zip(reversed(layers), reversed(caches)):
        grad, grad_w, grad_b = layer.backward_from_output(grad, cache)
        grads.append((grad_w, grad_b))
    grads.reverse()
    return grad, grads


def _flatten(layer_grads):
    flat = []
    for grad_w, grad_b in layer_grads:
        flat.extend((grad_w, grad_b))
    return flat


class FeedForwardNet:
    """A chain of dense layers whose last layer is softmax."""

    def __init__(self, layers):
        _check_chain(layers)
        if layers[-1].activation != "softmax":
            raise ValueError("the output layer must use softmax")
        for layer in layers[:-1]:
            if layer.activation == "softmax":
                raise ValueError("softmax is reserved for the output layer")
        self.layers = list(layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def init_params(self, rng) -> None:
        for layer in self.layers:
            layer.init_params(rng)

    def forward(self, x, training: bool = False, dropout_rate: float = 0.0, rng=None):
        return _stack_forward(self.layers, x, training, dropout_rate, rng)

    def backward(self, caches, probs, onehot):
        """Gradients of the mean cross-entropy, aligned with ``parameters()``."""
        grad_z = (probs - onehot) / probs.shape[0]
        grad, grad_w, grad_b = self.layers[-1].backward_from_preactivation(grad_z, caches[-1])
        _, hidden_grads = _stack_backward(self.layers[:-1], caches[:-1], grad)
        return _flatten(hidden_grads + [(grad_w, grad_b)])

    def parameters(self):
        params = []
        for layer in self.layers:
            params.extend((layer.weight, layer.bias))
        return params

    def parameter_masks(self):
        """Connectivity masks aligned with ``parameters()`` (None = unconstrained)."""
        masks = []
        for layer in self.layers:
            masks.extend((layer.mask, None))
        return masks


class DualBranchNet:
    """Two parallel layer stacks feeding one softmax head.

    Both branches see the same input; their final hidden activations are
    concatenated (branch A's columns first) and passed to the head stack.
    """

    def __init__(self, branch_a, branch_b, head):
        _check_chain(branch_a)
        _check_chain(branch_b)
        _check_chain(head)
        for layer in list(branch_a) + list(branch_b) + list(head[:-1]):
            if layer.activation == "softmax":
                raise ValueError("softmax is reserved for the output layer")
        if head[-1].activation != "softmax":
            raise ValueError("the output layer must use softmax")
        if branch_a[0].in_dim != branch_b[0].in_dim:
            raise ValueError("both branches must accept the same input width")
        joint = branch_a[-1].out_dim + branch_b[-1].out_dim
        if head[0].in_dim != joint:
            raise ValueError(
                f"head expects {head[0].in_dim} inputs but the branches emit {joint}"
            )
        self.branch_a = list(branch_a)
        self.branch_b = list(branch_b)
        self.head = list(head)

    @property
    def in_dim(self) -> int:
        return self.branch_a[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.head[-1].out_dim

    def _all_layers(self):
        return self.branch_a + self.branch_b + self.head

    def init_params(self, rng) -> None:
        for layer in self._all_layers():
            layer.init_params(rng)

    def forward(self, x, training: bool = False, dropout_rate: float = 0.0, rng=None):
        out_a, caches_a = _stack_forward(self.branch_a, x, training, dropout_rate, rng)
        out_b, caches_b = _stack_forward(self.branch_b, x, training, dropout_rate, rng)
        joint = np.hstack((out_a, out_b))
        probs, caches_head = _stack_forward(self.head, joint, training, dropout_rate, rng)
        return probs, (caches_a, caches_b, caches_head, out_a.shape[1])

    def branch_outputs(self, x):
        """Evaluation-mode final hidden activations of each branch."""
        out_a, _ = _stack_forward(self.branch_a, x, False, 0.0, None)
        out_b, _ = _stack_forward(self.branch_b, x, False, 0.0, None)
        return out_a, out_b

    def backward(self, caches, probs, onehot):
        caches_a, caches_b, caches_head, width_a = caches
        grad_z = (probs - onehot) / probs.shape[0]
        grad, grad_w, grad_b = self.head[-1].backward_from_preactivation(grad_z, caches_head[-1])
        grad, head_grads = _stack_backward(self.head[:-1], caches_head[:-1], grad)
        head_grads = head_grads + [(grad_w, grad_b)]
        _, grads_a = _stack_backward(self.branch_a, caches_a, grad[:, :width_a])
        _, grads_b = _stack_backward(self.branch_b, caches_b, grad[:, width_a:])
        return _flatten(grads_a + grads_b + head_grads)

    def parameters(self):
        params = []
        for layer in self._all_layers():
            params.extend((layer.weight, layer.bias))
        return params

    def parameter_masks(self):
        masks = []
        for layer in self._all_layers():
            masks.extend((layer.mask, None))
        return masks
