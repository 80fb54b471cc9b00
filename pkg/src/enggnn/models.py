"""Feedforward classifiers over feature graphs, and their feature importances.

Three related binary classifiers share one training engine:

* ``DfnClassifier`` — fully connected chain p -> p -> hidden widths -> softmax.
* ``GedfnClassifier`` — the same chain with the first layer masked by a feature
  graph's self-loop-augmented adjacency; the graph is either supplied or
  extracted from a tree ensemble fitted on the training fold.
* ``EngGnnClassifier`` — two graph-masked branches (a supplied biological graph
  and a tree-derived graph) whose last hidden layers are concatenated into a
  small softmax head.

``connection_importance`` scores each feature by the absolute masked
connection weights on its first-layer row and column, summed over all
graph-masked input layers (both branches for the dual-branch model).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_fitted, check_labels, check_matrix
from .graphs import FeatureGraph, add_self_loops
from .nn.layers import DenseLayer
from .nn.network import DualBranchNet, FeedForwardNet
from .nn.training import TrainConfig, train_network
from .trees import BoostedTreesClassifier, RandomForestClassifier, extract_feature_graph

MODEL_KINDS = ("enggnn", "gedfn_e", "gedfn_xgb", "gedfn_rf", "dfn", "gbt", "rf")

GRAPH_SOURCES = ("boosted", "forest")


def _branch_layers(p, mask, hidden_widths):
    """Masked p -> p input layer followed by the dense hidden reductions."""
    layers = [DenseLayer(p, p, activation="relu", mask=mask)]
    width = p
    for next_width in hidden_widths:
        layers.append(DenseLayer(width, next_width, activation="relu"))
        width = next_width
    return layers


def _fit_graph_ensemble(source, X, y01, options, random_state):
    if source == "boosted":
        cls = BoostedTreesClassifier
    elif source == "forest":
        cls = RandomForestClassifier
    else:
        raise ValueError(f"unknown graph source {source!r}; expected one of {GRAPH_SOURCES}")
    opts = dict(options or {})
    opts.setdefault("random_state", random_state)
    return cls(**opts).fit(X, y01)


class _FeedForwardClassifier(ClassifierMixin, BaseEstimator):
    """Shared fit/predict machinery; subclasses provide ``_build_network``."""

    def _train_config(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            dropout_rate=self.dropout_rate,
            early_stop_patience=self.early_stop_patience,
            early_stop_min_delta=self.early_stop_min_delta,
        )

    def fit(self, X, y):
        X = check_matrix(X, "X")
        y, classes = check_labels(y, X.shape[0])
        if classes.size != 2:
            raise ValueError("fit requires exactly two classes in y")
        config = self._train_config()
        rng = np.random.default_rng(self.random_state)
        y01 = (y == classes[1]).astype(np.int64)
        network = self._build_network(X, y01)
        network.init_params(rng)
        onehot = np.zeros((X.shape[0], 2))
        onehot[np.arange(X.shape[0]), y01] = 1.0
        self.loss_history_ = train_network(network, X, onehot, config, rng)
        self.network_ = network
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_fitted(self, "network_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns but fit saw {self.n_features_in_}")
        probs, _ = self.network_.forward(X)
        return probs

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    @property
    def feature_importances_(self):
        return connection_importance(self)


class DfnClassifier(_FeedForwardClassifier):
    """Fully connected feedforward baseline: p -> p -> hidden widths -> softmax."""

    def __init__(self, hidden_widths=(64, 16), learning_rate=1e-4, epochs=50,
                 batch_size=16, dropout_rate=0.2, early_stop_patience=5,
                 early_stop_min_delta=1e-5, random_state=0):
        self.hidden_widths = hidden_widths
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.dropout_rate = dropout_rate
        self.early_stop_patience = early_stop_patience
        self.early_stop_min_delta = early_stop_min_delta
        self.random_state = random_state

    def _build_network(self, X, y01):
        p = X.shape[1]
        layers = _branch_layers(p, None, tuple(self.hidden_widths))
        layers.append(DenseLayer(layers[-1].out_dim, 2, activation="softmax"))
        return FeedForwardNet(layers)


class GedfnClassifier(_FeedForwardClassifier):
    """Graph-masked feedforward classifier.

    The first layer keeps only connections present in the feature graph's
    adjacency plus self-loops. Pass the graph directly via ``graph``, or set
    ``graph_source`` to ``"boosted"``/``"forest"`` to derive it from a tree
    ensemble fitted on the training fold (stored as ``ensemble_``, its graph as
    ``generated_graph_``); ``tree_options`` are forwarded to that ensemble.
    """

    def __init__(self, graph=None, graph_source=None, tree_options=None,
                 hidden_widths=(64, 16), learning_rate=1e-4, epochs=50,
                 batch_size=16, dropout_rate=0.2, early_stop_patience=5,
                 early_stop_min_delta=1e-5, random_state=0):
        self.graph = graph
        self.graph_source = graph_source
        self.tree_options = tree_options
        self.hidden_widths = hidden_widths
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.dropout_rate = dropout_rate
        self.early_stop_patience = early_stop_patience
        self.early_stop_min_delta = early_stop_min_delta
        self.random_state = random_state

    def _resolve_graph(self, X, y01):
        if (self.graph is None) == (self.graph_source is None):
            raise ValueError("provide exactly one of graph or graph_source")
        if self.graph is not None:
            if not isinstance(self.graph, FeatureGraph):
                raise TypeError("graph must be a FeatureGraph")
            if self.graph.node_count != X.shape[1]:
                raise ValueError(
                    f"graph has {self.graph.node_count} nodes but X has {X.shape[1]} features"
                )
            return self.graph
        self.ensemble_ = _fit_graph_ensemble(
            self.graph_source, X, y01, self.tree_options, self.random_state
        )
        self.generated_graph_ = extract_feature_graph(self.ensemble_, X.shape[1])
        return self.generated_graph_

    def _build_network(self, X, y01):
        graph = self._resolve_graph(X, y01)
        p = X.shape[1]
        layers = _branch_layers(p, add_self_loops(graph), tuple(self.hidden_widths))
        layers.append(DenseLayer(layers[-1].out_dim, 2, activation="softmax"))
        return FeedForwardNet(layers)


class EngGnnClassifier(_FeedForwardClassifier):
    """Dual-graph classifier: an external-graph branch plus a tree-graph branch.

    Both branches are graph-masked chains p -> p -> hidden widths over the same
    input; their final hidden activations are concatenated (external branch
    first) and fed to a ``head_width`` dense layer and a softmax output.
    ``external_graph`` must be undirected. The generated branch's directed
    graph is either passed as ``generated_graph`` or extracted from a tree
    ensemble (``graph_source``) fitted on the training fold.
    """

    def __init__(self, external_graph=None, generated_graph=None,
                 graph_source="boosted", tree_options=None,
                 hidden_widths=(64, 16), head_width=16, learning_rate=1e-4,
                 epochs=50, batch_size=16, dropout_rate=0.2,
                 early_stop_patience=5, early_stop_min_delta=1e-5,
                 random_state=0):
        self.external_graph = external_graph
        self.generated_graph = generated_graph
        self.graph_source = graph_source
        self.tree_options = tree_options
        self.hidden_widths = hidden_widths
        self.head_width = head_width
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.dropout_rate = dropout_rate
        self.early_stop_patience = early_stop_patience
        self.early_stop_min_delta = early_stop_min_delta
        self.random_state = random_state

    def _check_graph(self, graph, name, directed, p):
        if not isinstance(graph, FeatureGraph):
            raise TypeError(f"{name} must be a FeatureGraph")
        if graph.node_count != p:
            raise ValueError(f"{name} has {graph.node_count} nodes but X has {p} features")
        if graph.directed != directed:
            expected = "directed" if directed else "undirected"
            raise ValueError(f"{name} must be {expected}")

    def _build_network(self, X, y01):
        p = X.shape[1]
        if self.external_graph is None:
            raise ValueError("external_graph is required")
        self._check_graph(self.external_graph, "external_graph", False, p)
        if self.generated_graph is not None:
            generated = self.generated_graph
        else:
            self.ensemble_ = _fit_graph_ensemble(
                self.graph_source, X, y01, self.tree_options, self.random_state
            )
            generated = extract_feature_graph(self.ensemble_, p)
        self._check_graph(generated, "generated_graph", True, p)
        self.generated_graph_ = generated
        widths = tuple(self.hidden_widths)
        branch_external = _branch_layers(p, add_self_loops(self.external_graph), widths)
        branch_generated = _branch_layers(p, add_self_loops(generated), widths)
        joint = branch_external[-1].out_dim + branch_generated[-1].out_dim
        head = [
            DenseLayer(joint, self.head_width, activation="relu"),
            DenseLayer(self.head_width, 2, activation="softmax"),
        ]
        return DualBranchNet(branch_external, branch_generated, head)


def connection_importance(model) -> np.ndarray:
    """Per-feature sum of absolute masked first-layer weights, row plus column.

    For feature j this adds every |W * M| entry in row j (connections leaving
    j) and column j (connections entering j); a self-connection's diagonal
    entry is counted by both sums. For the dual-branch model the two branches'
    scores are added; for the unmasked baseline the mask is implicitly
    all-ones.
    """
    check_fitted(model, "network_")
    network = model.network_
    if isinstance(network, DualBranchNet):
        first_layers = [network.branch_a[0], network.branch_b[0]]
    else:
        first_layers = [network.layers[0]]
    total = np.zeros(model.n_features_in_)
    for layer in first_layers:
        if layer.in_dim != layer.out_dim:
            raise ValueError("connection importance needs a square first layer")
        weights = np.abs(layer.effective_weight())
        total += weights.sum(axis=1) + weights.sum(axis=0)
    return total


def make_model(kind, *, external_graph=None, random_state=0,
               nn_options=None, gbt_options=None, rf_options=None):
    """Construct one of the benchmark models by kind string.

    ``nn_options`` feed the feedforward constructors (``head_width`` is only
    meaningful for the dual-branch model and is dropped for the chain models);
    ``gbt_options``/``rf_options`` feed tree ensembles, whether standalone or
    used as graph generators. Kinds needing the external graph: ``enggnn`` and
    ``gedfn_e``.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    nn_opts = dict(nn_options or {})
    if kind != "enggnn":
        nn_opts.pop("head_width", None)
    if kind in ("enggnn", "gedfn_e") and external_graph is None:
        raise ValueError(f"model kind {kind!r} requires an external graph")
    if kind == "enggnn":
        return EngGnnClassifier(
            external_graph=external_graph,
            graph_source="boosted",
            tree_options=gbt_options,
            random_state=random_state,
            **nn_opts,
        )
    if kind == "gedfn_e":
        return GedfnClassifier(graph=external_graph, random_state=random_state, **nn_opts)
    if kind == "gedfn_xgb":
        return GedfnClassifier(
            graph_source="boosted", tree_options=gbt_options,
            random_state=random_state, **nn_opts,
        )
    if kind == "gedfn_rf":
        return GedfnClassifier(
            graph_source="forest", tree_options=rf_options,
            random_state=random_state, **nn_opts,
        )
    if kind == "dfn":
        return DfnClassifier(random_state=random_state, **nn_opts)
    if kind == "gbt":
        return BoostedTreesClassifier(random_state=random_state, **(gbt_options or {}))
    return RandomForestClassifier(random_state=random_state, **(rf_options or {}))
