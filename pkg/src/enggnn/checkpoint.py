"""Versioned .npz checkpoints for the feedforward classifiers.

A checkpoint captures everything inference and importance ranking need —
layer shapes, activations, connectivity masks (as index pairs), float64
weights/biases, and the class labels — and restores them bit-exactly.
Training-only state (optimizer moments, loss history, graph provenance) is
not persisted.
"""

from __future__ import annotations

import numpy as np

from ._validation import check_fitted
from .models import DfnClassifier, EngGnnClassifier, GedfnClassifier
from .nn.layers import DenseLayer
from .nn.network import DualBranchNet, FeedForwardNet

FORMAT_VERSION = 1

_KIND_TO_CLASS = {
    "dfn": DfnClassifier,
    "gedfn": GedfnClassifier,
    "enggnn": EngGnnClassifier,
}
_CLASS_TO_KIND = {cls: kind for kind, cls in _KIND_TO_CLASS.items()}


def _pack_layers(payload, section, layers):
    payload[f"{section}_depth"] = len(layers)
    for i, layer in enumerate(layers):
        prefix = f"{section}_{i}"
        payload[f"{prefix}_weight"] = layer.weight
        payload[f"{prefix}_bias"] = layer.bias
        payload[f"{prefix}_activation"] = layer.activation
        if layer.mask is not None:
            rows, cols = np.nonzero(layer.mask)
            payload[f"{prefix}_mask_rows"] = rows
            payload[f"{prefix}_mask_cols"] = cols


def _unpack_layers(data, section):
    layers = []
    for i in range(int(data[f"{section}_depth"])):
        prefix = f"{section}_{i}"
        weight = data[f"{prefix}_weight"]
        bias = data[f"{prefix}_bias"]
        mask = None
        if f"{prefix}_mask_rows" in data.files:
            mask = np.zeros(weight.shape)
            mask[data[f"{prefix}_mask_rows"], data[f"{prefix}_mask_cols"]] = 1.0
        layer = DenseLayer(
            weight.shape[0], weight.shape[1],
            activation=str(data[f"{prefix}_activation"]),
            mask=mask,
        )
        layer.weight[...] = weight
        layer.bias[...] = bias
        layers.append(layer)
    return layers


def save_checkpoint(model, path) -> None:
    """Write a fitted feedforward classifier to ``path`` (numpy .npz format)."""
    kind = _CLASS_TO_KIND.get(type(model))
    if kind is None:
        raise TypeError(
            f"cannot checkpoint {type(model).__name__}; expected one of "
            f"{sorted(cls.__name__ for cls in _CLASS_TO_KIND)}"
        )
    check_fitted(model, "network_")
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "classes": model.classes_,
        "n_features": model.n_features_in_,
    }
    network = model.network_
    if isinstance(network, DualBranchNet):
        payload["sections"] = np.array(["branch_a", "branch_b", "head"])
        _pack_layers(payload, "branch_a", network.branch_a)
        _pack_layers(payload, "branch_b", network.branch_b)
        _pack_layers(payload, "head", network.head)
    else:
        payload["sections"] = np.array(["chain"])
        _pack_layers(payload, "chain", network.layers)
    with open(path, "wb") as handle:
        np.savez(handle, **payload)


def load_checkpoint(path):
    """Restore a checkpointed classifier, ready for predict/importance calls."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format version {version}")
        kind = str(data["kind"])
        if kind not in _KIND_TO_CLASS:
            raise ValueError(f"unrecognized checkpoint kind {kind!r}")
        sections = [str(s) for s in data["sections"]]
        if sections == ["chain"]:
            network = FeedForwardNet(_unpack_layers(data, "chain"))
        elif sections == ["branch_a", "branch_b", "head"]:
            network = DualBranchNet(
                _unpack_layers(data, "branch_a"),
                _unpack_layers(data, "branch_b"),
                _unpack_layers(data, "head"),
            )
        else:
            raise ValueError(f"unrecognized checkpoint structure {sections}")
        model = _KIND_TO_CLASS[kind]()
        model.network_ = network
        model.classes_ = data["classes"]
        model.n_features_in_ = int(data["n_features"])
    return model
