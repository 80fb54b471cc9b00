"""Connection-strength feature importance from first-layer weights."""

import numpy as np
import pytest

from enggnn.graphs import FeatureGraph, add_self_loops
from enggnn.models import DfnClassifier, EngGnnClassifier, connection_importance
from enggnn.nn.layers import DenseLayer
from enggnn.nn.network import DualBranchNet, FeedForwardNet


def chain_shell(first_layer, n_features):
    """A fitted-looking chain classifier with a hand-set first layer."""
    model = DfnClassifier()
    model.network_ = FeedForwardNet([
        first_layer,
        DenseLayer(first_layer.out_dim, 2, activation="softmax"),
    ])
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = n_features
    return model


def dual_shell(layer_a, layer_b, n_features):
    model = EngGnnClassifier(external_graph=FeatureGraph(n_features, []))
    head = [DenseLayer(layer_a.out_dim + layer_b.out_dim, 2, activation="softmax")]
    model.network_ = DualBranchNet(
        [layer_a], [layer_b], head)
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = n_features
    return model


def test_three_feature_hand_check():
    """|W * M| row sums + column sums, diagonal counted by both.

    Graph 0-1 with self-loops: M = [[1,1,0],[1,1,0],[0,0,1]].
    W = [[1,-2,9],[0.5,0,9],[9,9,-1]] (the 9s are masked away), so
    |W*M| = [[1,2,0],[0.5,0,0],[0,0,1]]; row sums (3, 0.5, 1),
    column sums (1.5, 2, 1) -> importances (4.5, 2.5, 2).
    """
    mask = add_self_loops(FeatureGraph(3, [(0, 1)]))
    layer = DenseLayer(3, 3, mask=mask)
    layer.weight[:] = mask * np.array([[1.0, -2.0, 9.0],
                                       [0.5, 0.0, 9.0],
                                       [9.0, 9.0, -1.0]]) + (1 - mask) * 9.0
    np.testing.assert_allclose(
        connection_importance(chain_shell(layer, 3)), [4.5, 2.5, 2.0]
    )


def test_unmasked_first_layer_uses_raw_weights():
    layer = DenseLayer(2, 2, activation="relu")
    layer.weight[:] = [[1.0, -1.0], [2.0, 0.0]]
    # rows (2, 2), cols (3, 1)
    np.testing.assert_allclose(
        connection_importance(chain_shell(layer, 2)), [5.0, 3.0]
    )


def test_dual_branches_add():
    mask_a = add_self_loops(FeatureGraph(2, []))          # identity mask
    layer_a = DenseLayer(2, 2, mask=mask_a)
    layer_a.weight[:] = np.array([[2.0, 0.0], [0.0, 3.0]])
    layer_b = DenseLayer(2, 2)
    layer_b.weight[:] = np.array([[1.0, 1.0], [1.0, 1.0]])
    # branch A: rows (2,3) + cols (2,3) = (4,6); branch B: (2,2)+(2,2) = (4,4)
    np.testing.assert_allclose(
        connection_importance(dual_shell(layer_a, layer_b, 2)), [8.0, 10.0]
    )


def test_all_ones_dual_weights_give_four_p():
    """Complete connectivity with unit weights scores exactly 4p per feature."""
    p = 5
    layer_a, layer_b = DenseLayer(p, p), DenseLayer(p, p)
    layer_a.weight[:] = 1.0
    layer_b.weight[:] = -1.0
    out = connection_importance(dual_shell(layer_a, layer_b, p))
    np.testing.assert_allclose(out, 4.0 * p)


def test_rectangular_first_layer_rejected():
    layer = DenseLayer(3, 2, activation="relu")
    layer.weight[:] = 1.0
    with pytest.raises(ValueError):
        connection_importance(chain_shell(layer, 3))


def test_unfitted_model_rejected():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        connection_importance(DfnClassifier())
