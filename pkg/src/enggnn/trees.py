"""Tree ensembles grown with exact greedy splits, and feature graphs read off them.

Both ensembles share one node type and one depth-first growth pattern:

* ``BoostedTreesClassifier`` — binary gradient boosting on the logistic loss
  with second-order (gradient/hessian) split gains and L2 leaf regularization.
* ``RandomForestClassifier`` — bootstrapped Gini trees with per-split feature
  subsampling; the forest prediction is the mean of per-tree class
  probabilities.

``extract_feature_graph`` turns a fitted ensemble into a directed graph over
features: an edge f -> g records that a split on f was the direct parent of a
split on g somewhere in the ensemble.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_fitted, check_labels, check_matrix
from .graphs import FeatureGraph

PROB_CLIP = 1e-12
PRIOR_CLIP = 1e-6


class TreeNode:
    """Binary tree node; internal nodes carry a split, leaves carry a value."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "gain", "n_samples")

    def __init__(self, value=None, feature=None, threshold=None,
                 left=None, right=None, gain=0.0, n_samples=0):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.gain = gain
        self.n_samples = n_samples

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def tree_predict(root: TreeNode, X: np.ndarray, out: np.ndarray) -> None:
    """Route every row of X to its leaf and write the leaf value into ``out``."""
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
            continue
        go_left = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))


def _default_tree_count(n_features: int) -> int:
    return max(1, round(0.2 * n_features))


def _binary_log_loss(y01: np.ndarray, prob: np.ndarray) -> float:
    prob = np.clip(prob, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(-np.mean(y01 * np.log(prob) + (1.0 - y01) * np.log(1.0 - prob)))


def _sorted_feature_block(X, rows, feature_ids):
    """Column f of the result holds X[rows, feature_ids[f]] ascending.

    Also returns the (stable) ordering so callers can align per-row values.
    """
    xs = X[np.ix_(rows, feature_ids)]
    order = np.argsort(xs, axis=0, kind="stable")
    return np.take_along_axis(xs, order, axis=0), order


def _pick_best(scores: np.ndarray, valid: np.ndarray):
    """(cut_position, column) of the best valid score; None if nothing is valid.

    Ties resolve to the earliest column, then the earliest cut, so the search
    is deterministic.
    """
    scores = np.where(valid, scores, -np.inf)
    per_col_cut = np.argmax(scores, axis=0)
    per_col = scores[per_col_cut, np.arange(scores.shape[1])]
    col = int(np.argmax(per_col))
    if not np.isfinite(per_col[col]):
        return None
    return int(per_col_cut[col]), col


class BoostedTreesClassifier(ClassifierMixin, BaseEstimator):
    """Binary gradient boosting with second-order logistic-loss splits.

    Trees are grown depth-first by exact greedy search over sorted feature
    values. A split's gain is

        0.5 * (G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H+lambda)) - gamma

    and only strictly positive gains split; leaf weights are -G/(H+lambda).
    Boosting starts from the log-odds of the training prevalence (clipped away
    from 0 and 1) and each tree's contribution is scaled by ``shrinkage``.

    ``n_trees=None`` grows max(1, round(0.2 * n_features)) trees.
    ``random_state`` is accepted for interface uniformity; the exact greedy
    algorithm is deterministic. ``feature_importances_`` is the mean split
    gain per feature (zero for features never split on).
    """

    def __init__(self, n_trees=None, max_depth=3, shrinkage=0.3, reg_lambda=1.0,
                 gamma=0.0, min_child_weight=1.0, random_state=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.shrinkage = shrinkage
        self.reg_lambda = reg_lambda
        self.gamma = gamma
        self.min_child_weight = min_child_weight
        self.random_state = random_state

    def _validate_params(self):
        if self.n_trees is not None and self.n_trees < 1:
            raise ValueError(f"n_trees must be positive, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be positive, got {self.max_depth}")
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError(f"shrinkage must be in (0, 1], got {self.shrinkage}")
        if self.reg_lambda < 0.0 or self.gamma < 0.0 or self.min_child_weight < 0.0:
            raise ValueError("reg_lambda, gamma and min_child_weight must be non-negative")

    def fit(self, X, y):
        self._validate_params()
        X = check_matrix(X, "X")
        y, classes = check_labels(y, X.shape[0])
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        n, p = X.shape
        n_trees = self.n_trees if self.n_trees is not None else _default_tree_count(p)
        y01 = (y == classes[-1]).astype(np.float64)
        prior = float(np.clip(y01.mean(), PRIOR_CLIP, 1.0 - PRIOR_CLIP))
        self.base_score_ = math.log(prior / (1.0 - prior))
        self.trees_ = []
        self.train_losses_ = []
        if classes.size < 2:
            warnings.warn(
                "y contains a single class; fitting a constant-score model",
                UserWarning,
                stacklevel=2,
            )
            self.feature_importances_ = np.zeros(p)
            return self
        margin = np.full(n, self.base_score_)
        all_rows = np.arange(n)
        for _ in range(n_trees):
            prob = expit(margin)
            grad = prob - y01
            hess = prob * (1.0 - prob)
            tree = self._grow_tree(X, grad, hess, all_rows, depth=0)
            self.trees_.append(tree)
            step = np.zeros(n)
            tree_predict(tree, X, step)
            margin += self.shrinkage * step
            self.train_losses_.append(_binary_log_loss(y01, expit(margin)))
        self.feature_importances_ = self._gain_importances(p)
        return self

    def _grow_tree(self, X, grad, hess, rows, depth):
        g_total = float(grad[rows].sum())
        h_total = float(hess[rows].sum())
        node = TreeNode(value=-g_total / (h_total + self.reg_lambda), n_samples=rows.size)
        if depth >= self.max_depth or rows.size < 2:
            return node
        best = self._best_split(X, grad, hess, rows, g_total, h_total)
        if best is None:
            return node
        node.feature, node.threshold, node.gain = best
        go_left = X[rows, node.feature] <= node.threshold
        node.left = self._grow_tree(X, grad, hess, rows[go_left], depth + 1)
        node.right = self._grow_tree(X, grad, hess, rows[~go_left], depth + 1)
        return node

    def _best_split(self, X, grad, hess, rows, g_total, h_total):
        features = np.arange(X.shape[1])
        xs, order = _sorted_feature_block(X, rows, features)
        g_left = np.cumsum(grad[rows][order], axis=0)[:-1]
        h_left = np.cumsum(hess[rows][order], axis=0)[:-1]
        g_right = g_total - g_left
        h_right = h_total - h_left
        parent = g_total * g_total / (h_total + self.reg_lambda)
        gains = 0.5 * (
            g_left ** 2 / (h_left + self.reg_lambda)
            + g_right ** 2 / (h_right + self.reg_lambda)
            - parent
        ) - self.gamma
        valid = (
            (xs[1:] != xs[:-1])
            & (h_left >= self.min_child_weight)
            & (h_right >= self.min_child_weight)
            & (gains > 0.0)
        )
        best = _pick_best(gains, valid)
        if best is None:
            return None
        cut, col = best
        threshold = 0.5 * (xs[cut, col] + xs[cut + 1, col])
        return int(features[col]), float(threshold), float(gains[cut, col])

    def _gain_importances(self, p):
        total = np.zeros(p)
        count = np.zeros(p)
        for tree in self.trees_:
            stack = [tree]
            while stack:
                node = stack.pop()
                if node.is_leaf:
                    continue
                total[node.feature] += node.gain
                count[node.feature] += 1.0
                stack.extend((node.left, node.right))
        out = np.zeros(p)
        used = count > 0
        out[used] = total[used] / count[used]
        return out

    def decision_margin(self, X):
        """Raw additive score: base score plus shrinkage-scaled tree outputs."""
        check_fitted(self, "trees_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns but fit saw {self.n_features_in_}")
        margin = np.full(X.shape[0], self.base_score_)
        step = np.zeros(X.shape[0])
        for tree in self.trees_:
            step[:] = 0.0
            tree_predict(tree, X, step)
            margin += self.shrinkage * step
        return margin

    def predict_proba(self, X):
        check_fitted(self, "trees_")
        if self.classes_.size == 1:
            X = check_matrix(X, "X")
            return np.ones((X.shape[0], 1))
        positive = expit(self.decision_margin(X))
        return np.column_stack((1.0 - positive, positive))

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    """Bootstrap-aggregated Gini decision trees with per-split feature subsampling.

    Each tree draws its own bootstrap sample and, at every node, considers
    ``mtry`` features sampled without replacement (default floor(sqrt(p))).
    Splits maximize the weighted Gini impurity decrease and must decrease it
    strictly; trees grow until purity, ``max_depth`` (None = unlimited) or
    ``min_samples_leaf``. Leaves hold bootstrap class proportions and the
    forest predicts their per-tree average.

    Per-tree randomness comes from independent SeedSequence substreams of
    ``random_state`` so results do not depend on evaluation order.
    ``feature_importances_`` is the node-size-weighted impurity decrease summed
    within each tree and averaged across trees.
    """

    def __init__(self, n_trees=None, max_depth=None, mtry=None,
                 min_samples_leaf=1, bootstrap=True, random_state=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.mtry = mtry
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.random_state = random_state

    def _validate_params(self, p):
        if self.n_trees is not None and self.n_trees < 1:
            raise ValueError(f"n_trees must be positive, got {self.n_trees}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be positive, got {self.max_depth}")
        if self.mtry is not None and not 1 <= self.mtry <= p:
            raise ValueError(f"mtry must be in [1, {p}], got {self.mtry}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be positive, got {self.min_samples_leaf}")

    def fit(self, X, y):
        X = check_matrix(X, "X")
        n, p = X.shape
        self._validate_params(p)
        y, classes = check_labels(y, n)
        self.classes_ = classes
        self.n_features_in_ = p
        n_trees = self.n_trees if self.n_trees is not None else _default_tree_count(p)
        self.trees_ = []
        if classes.size < 2:
            warnings.warn(
                "y contains a single class; fitting a constant-score model",
                UserWarning,
                stacklevel=2,
            )
            self.feature_importances_ = np.zeros(p)
            return self
        y01 = (y == classes[-1]).astype(np.int64)
        mtry = self.mtry if self.mtry is not None else max(1, math.isqrt(p))
        importances = np.zeros(p)
        streams = np.random.SeedSequence(self.random_state).spawn(n_trees)
        for stream in streams:
            rng = np.random.default_rng(stream)
            rows = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree_importance = np.zeros(p)
            tree = self._grow_tree(X, y01, rows, 0, mtry, rng, rows.size, tree_importance)
            self.trees_.append(tree)
            importances += tree_importance
        self.feature_importances_ = importances / n_trees
        return self

    def _grow_tree(self, X, y01, rows, depth, mtry, rng, n_root, importance):
        n_node = rows.size
        ones = int(y01[rows].sum())
        probs = np.array([n_node - ones, ones], dtype=np.float64) / n_node
        node = TreeNode(value=probs, n_samples=n_node)
        if (
            ones in (0, n_node)
            or n_node < 2 * self.min_samples_leaf
            or n_node < 2
            or (self.max_depth is not None and depth >= self.max_depth)
        ):
            return node
        features = rng.choice(X.shape[1], size=mtry, replace=False)
        best = self._best_split(X, y01, rows, features, ones)
        if best is None:
            return node
        node.feature, node.threshold, node.gain = best
        importance[node.feature] += (n_node / n_root) * node.gain
        go_left = X[rows, node.feature] <= node.threshold
        node.left = self._grow_tree(X, y01, rows[go_left], depth + 1, mtry, rng, n_root, importance)
        node.right = self._grow_tree(X, y01, rows[~go_left], depth + 1, mtry, rng, n_root, importance)
        return node

    def _best_split(self, X, y01, rows, features, total_ones):
        n_node = rows.size
        xs, order = _sorted_feature_block(X, rows, features)
        ones_left = np.cumsum(y01[rows][order], axis=0)[:-1].astype(np.float64)
        n_left = np.arange(1, n_node, dtype=np.float64)[:, None]
        n_right = n_node - n_left
        ones_right = total_ones - ones_left
        frac_l = ones_left / n_left
        frac_r = ones_right / n_right
        gini_left = 2.0 * frac_l * (1.0 - frac_l)
        gini_right = 2.0 * frac_r * (1.0 - frac_r)
        frac_parent = total_ones / n_node
        gini_parent = 2.0 * frac_parent * (1.0 - frac_parent)
        decrease = gini_parent - (n_left / n_node) * gini_left - (n_right / n_node) * gini_right
        valid = (
            (xs[1:] != xs[:-1])
            & (n_left >= self.min_samples_leaf)
            & (n_right >= self.min_samples_leaf)
            & (decrease > 0.0)
        )
        best = _pick_best(decrease, valid)
        if best is None:
            return None
        cut, col = best
        threshold = 0.5 * (xs[cut, col] + xs[cut + 1, col])
        return int(features[col]), float(threshold), float(decrease[cut, col])

    def predict_proba(self, X):
        check_fitted(self, "trees_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns but fit saw {self.n_features_in_}")
        if self.classes_.size == 1:
            return np.ones((X.shape[0], 1))
        total = np.zeros((X.shape[0], 2))
        leaf = np.zeros((X.shape[0], 2))
        for tree in self.trees_:
            leaf[:] = 0.0
            tree_predict(tree, X, leaf)
            total += leaf
        return total / len(self.trees_)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


def extract_feature_graph(model, node_count: int | None = None) -> FeatureGraph:
    """Directed feature graph of parent-child split pairs in a fitted ensemble.

    For every internal node splitting on feature f whose left or right child is
    itself internal and splits on g, the edge (f, g) is added; the union is
    taken over all trees. The graph spans all features, so features never split
    on appear as isolated nodes (self-loops are added later by the mask
    construction, which spans every feature either way).
    """
    check_fitted(model, "trees_")
    p = int(node_count) if node_count is not None else model.n_features_in_
    if p < model.n_features_in_:
        raise ValueError(
            f"node_count {p} is smaller than the fitted feature count {model.n_features_in_}"
        )
    edges = set()
    for tree in model.trees_:
        stack = [tree]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            for child in (node.left, node.right):
                if not child.is_leaf:
                    edges.add((node.feature, child.feature))
                stack.append(child)
    return FeatureGraph(p, edges, directed=True)
