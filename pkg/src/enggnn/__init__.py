"""Dual-graph feedforward models for binary omics classification and feature selection.

The package couples a graph-masked neural architecture (one branch masked by a
curated biological network, one by a graph distilled from a tree ensemble fit
on the same training fold) with from-scratch tree ensembles, a synthetic
benchmark generator, closed-form evaluation metrics, and a reproducible
experiment harness.
"""

__version__ = "0.1.0"

from .checkpoint import load_checkpoint, save_checkpoint
from .graphs import (
    FeatureGraph,
    add_self_loops,
    closeness_centrality,
    generate_ba_graph,
    merge_graphs,
    one_hop_expand,
)
from .metrics import (
    classification_metrics,
    percentile_rank,
    pr_auc,
    roc_auc,
    welch_t_test,
)
from .models import (
    MODEL_KINDS,
    DfnClassifier,
    EngGnnClassifier,
    GedfnClassifier,
    connection_importance,
    make_model,
)
from .nn.scaling import ZScoreScaler
from .simulate import SimulationScenario, build_dataset
from .trees import (
    BoostedTreesClassifier,
    RandomForestClassifier,
    extract_feature_graph,
)

__all__ = [
    "MODEL_KINDS",
    "BoostedTreesClassifier",
    "DfnClassifier",
    "EngGnnClassifier",
    "FeatureGraph",
    "GedfnClassifier",
    "RandomForestClassifier",
    "SimulationScenario",
    "ZScoreScaler",
    "add_self_loops",
    "build_dataset",
    "classification_metrics",
    "closeness_centrality",
    "connection_importance",
    "extract_feature_graph",
    "generate_ba_graph",
    "load_checkpoint",
    "make_model",
    "merge_graphs",
    "one_hop_expand",
    "percentile_rank",
    "pr_auc",
    "roc_auc",
    "save_checkpoint",
    "welch_t_test",
]
