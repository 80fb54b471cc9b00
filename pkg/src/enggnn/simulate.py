"""Synthetic benchmark generator.

One dataset is built in five seeded stages, each on its own child stream of
the scenario seed so any stage can be reproduced independently:

1. a scale-free feature graph (preferential attachment),
2. uniform edge weights on a strictly lower-triangular cascade matrix A,
3. features X ~ N(mu, Sigma) with Sigma = (I-A)^-1 (I-A)^-T and
   mu_j ~ U[7, 13],
4. a "true" feature core drawn from closeness-centrality strata and expanded
   one hop to the important set,
5. a binary outcome thresholding g = exp(phi) + phi^2, where phi is the
   min-max-rescaled random logit of the important features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .graphs import (
    FeatureGraph,
    closeness_centrality,
    generate_ba_graph,
    one_hop_expand,
)

THRESHOLD_MODES = ("quantile", "rescale")


@dataclass(frozen=True)
class SimulationScenario:
    """Size and shape knobs for one synthetic dataset.

    The feature count is ``round(feature_fraction * n_samples)`` and the true
    core size is ``round(true_fraction * n_features)``. ``threshold_mode``
    picks how the rescaled outcome score is cut into classes: at its
    ``threshold`` quantile (fixing the positive rate at 1 - threshold) or at
    the absolute rescaled value ``threshold``.
    """

    n_samples: int = 5000
    feature_fraction: float = 0.05
    true_fraction: float = 0.05
    attach_count: int = 2
    threshold: float = 0.6
    threshold_mode: str = "quantile"
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be at least 2, got {self.n_samples}")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError(f"feature_fraction must be in (0, 1], got {self.feature_fraction}")
        if not 0.0 < self.true_fraction <= 1.0:
            raise ValueError(f"true_fraction must be in (0, 1], got {self.true_fraction}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(
                f"threshold_mode must be one of {THRESHOLD_MODES}, got {self.threshold_mode!r}"
            )
        if self.n_features < 2:
            raise ValueError("scenario yields fewer than 2 features")
        if self.n_true_core < 1:
            raise ValueError("scenario yields an empty true-feature core")
        if not 1 <= self.attach_count < self.n_features:
            raise ValueError(
                f"attach_count must be in [1, {self.n_features - 1}], got {self.attach_count}"
            )

    @property
    def n_features(self) -> int:
        return int(round(self.feature_fraction * self.n_samples))

    @property
    def n_true_core(self) -> int:
        return int(round(self.true_fraction * self.n_features))


@dataclass
class SimulatedDataset:
    """One generated dataset plus its ground truth and generation details."""

    X: np.ndarray
    y: np.ndarray
    graph: FeatureGraph
    feature_names: list
    core_features: np.ndarray
    important_features: np.ndarray
    feature_labels: np.ndarray  # 0/1 per feature; 1 = in the important set
    beta0: float
    beta: np.ndarray  # aligned with important_features (ascending index order)
    mu: np.ndarray
    scenario: SimulationScenario
    details: dict = field(default_factory=dict)


def weighted_adjacency(graph: FeatureGraph, rng) -> np.ndarray:
    """Strictly lower-triangular cascade weights: entry [v, u] ~ U[0.1, 10] per
    undirected edge (u, v) with u < v, drawn in sorted edge order."""
    if graph.directed:
        raise ValueError("cascade weights are defined for undirected graphs")
    weights = np.zeros((graph.node_count, graph.node_count))
    for u, v in sorted(graph.edges):
        if u == v:
            continue
        weights[v, u] = rng.uniform(0.1, 10.0)
    return weights


def cascade_covariance(weighted: np.ndarray) -> np.ndarray:
    """Sigma = (I - A)^-1 (I - A)^-T via a triangular solve (no explicit inverse)."""
    weighted = np.asarray(weighted, dtype=np.float64)
    p = weighted.shape[0]
    if weighted.ndim != 2 or weighted.shape != (p, p):
        raise ValueError("weighted adjacency must be square")
    if np.any(np.triu(weighted) != 0.0):
        raise ValueError("weighted adjacency must be strictly lower triangular")
    inverse = solve_triangular(np.eye(p) - weighted, np.eye(p), lower=True)
    return inverse @ inverse.T


def cholesky_with_jitter(cov: np.ndarray, max_relative_jitter: float = 1e-8):
    """Lower Cholesky factor, adding diagonal jitter only if factorization fails.

    The jitter escalates tenfold from 1e-14 relative to the mean diagonal, up
    to ``max_relative_jitter``; returns ``(L, absolute jitter used)``.
    """
    cov = np.asarray(cov, dtype=np.float64)
    try:
        return cholesky(cov, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(cov)))
    relative = 1e-14
    while relative <= max_relative_jitter:
        jitter = relative * scale
        try:
            return cholesky(cov + jitter * np.eye(cov.shape[0]), lower=True), jitter
        except np.linalg.LinAlgError:
            relative *= 10.0
    raise np.linalg.LinAlgError(
        f"covariance could not be factorized within relative jitter {max_relative_jitter}"
    )


def sample_features(cov: np.ndarray, n_samples: int, rng,
                    mean_low: float = 7.0, mean_high: float = 13.0):
    """Draw X = mu + Z L^T with Z ~ N(0, I) and one mu_j ~ U[low, high] per column.

    The means are drawn before the normal block; returns ``(X, mu, jitter)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    factor, jitter = cholesky_with_jitter(cov)
    mu = rng.uniform(mean_low, mean_high, size=cov.shape[0])
    z = rng.standard_normal((n_samples, cov.shape[0]))
    return mu + z @ factor.T, mu, jitter


def select_true_features(graph: FeatureGraph, core_size: int, rng):
    """Draw the core from closeness strata and expand it one hop.

    Features are split at the median rank of closeness centrality (ties broken
    by index): the top half is the high stratum. ceil(0.8 * core_size) core
    members come from the high stratum and the rest from the low stratum, both
    uniformly without replacement. Returns ``(core, important)`` as sorted
    index arrays, where important = core plus all direct neighbors.
    """
    p = graph.node_count
    if not 1 <= core_size <= p:
        raise ValueError(f"core_size must be in [1, {p}], got {core_size}")
    order = np.argsort(-closeness_centrality(graph), kind="stable")
    high = order[: p // 2]
    low = order[p // 2:]
    from_high = math.ceil(0.8 * core_size)
    from_low = core_size - from_high
    if from_high > high.size or from_low > low.size:
        raise ValueError(
            f"cannot draw {from_high}/{from_low} core features from strata of "
            f"{high.size}/{low.size}"
        )
    picked = list(rng.choice(high, size=from_high, replace=False))
    if from_low > 0:
        picked.extend(rng.choice(low, size=from_low, replace=False))
    core = np.sort(np.asarray(picked, dtype=np.int64))
    important = np.sort(np.fromiter(one_hop_expand(graph, core), dtype=np.int64))
    return core, important


def generate_outcome(x_important: np.ndarray, rng, threshold: float = 0.6,
                     mode: str = "quantile", max_attempts: int = 20):
    """Binary outcome from a nonlinear transform of a random linear logit.

    The informative columns are standardized (zero mean, unit sample variance)
    before entering the logit, so each one contributes on the scale of its
    coefficient rather than of its raw variance; the cascade construction can
    otherwise spread column variances over many orders of magnitude and let a
    single column decide every label.  Then l = beta0 + Z @ beta with
    beta0 ~ N(-5, 5^2) and beta_j ~ U[-5, 5]; phi is l min-max rescaled to
    [0, 1]; g = exp(phi) + phi^2 is rescaled the same way and cut at its
    ``threshold`` quantile (mode "quantile") or at the value ``threshold``
    (mode "rescale"). Draws a fresh (beta0, beta) up to ``max_attempts`` times
    until both classes are present.

    Returns ``(y, beta0, beta)``.
    """
    if mode not in THRESHOLD_MODES:
        raise ValueError(f"mode must be one of {THRESHOLD_MODES}, got {mode!r}")
    n = x_important.shape[0]
    if n < 2:
        raise ValueError("need at least two samples to form two classes")
    sd = x_important.std(axis=0, ddof=1)
    sd[sd == 0.0] = 1.0
    z = (x_important - x_important.mean(axis=0)) / sd
    for _ in range(max_attempts):
        beta0 = float(rng.normal(-5.0, 5.0))
        beta = rng.uniform(-5.0, 5.0, size=x_important.shape[1])
        logit = beta0 + z @ beta
        span = logit.max() - logit.min()
        if span == 0.0:
            continue
        phi = (logit - logit.min()) / span
        g = np.exp(phi) + phi ** 2
        g_scaled = (g - g.min()) / (g.max() - g.min())
        if mode == "rescale":
            y = (g_scaled > threshold).astype(np.int64)
        else:
            y = (g_scaled > np.quantile(g_scaled, threshold)).astype(np.int64)
        if 0 < int(y.sum()) < n:
            return y, beta0, beta
    raise RuntimeError(f"failed to produce two outcome classes in {max_attempts} attempts")


def build_dataset(scenario: SimulationScenario) -> SimulatedDataset:
    """Generate one dataset; each stage uses its own child stream of the seed."""
    p = scenario.n_features
    streams = np.random.SeedSequence(scenario.seed).spawn(5)
    graph_rng, weight_rng, sample_rng, select_rng, outcome_rng = map(
        np.random.default_rng, streams
    )
    graph = generate_ba_graph(p, scenario.attach_count, graph_rng)
    weighted = weighted_adjacency(graph, weight_rng)
    cov = cascade_covariance(weighted)
    X, mu, jitter = sample_features(cov, scenario.n_samples, sample_rng)
    core, important = select_true_features(graph, scenario.n_true_core, select_rng)
    y, beta0, beta = generate_outcome(
        X[:, important], outcome_rng, scenario.threshold, scenario.threshold_mode
    )
    labels = np.zeros(p, dtype=np.int64)
    labels[important] = 1
    width = max(4, len(str(p - 1)))
    names = [f"feature_{i:0{width}d}" for i in range(p)]
    details = {
        "n_features": p,
        "n_true_core": scenario.n_true_core,
        "n_important": int(important.size),
        "important_prevalence": float(important.size / p),
        "class_prevalence": float(y.mean()),
        "cholesky_jitter": jitter,
        "graph_edges": graph.edge_count,
    }
    return SimulatedDataset(
        X=X, y=y, graph=graph, feature_names=names,
        core_features=core, important_features=important, feature_labels=labels,
        beta0=beta0, beta=beta, mu=mu, scenario=scenario, details=details,
    )
