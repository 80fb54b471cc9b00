"""Minimal double-precision feedforward engine with connectivity masks."""

from .layers import DenseLayer, apply_dropout, glorot_uniform, relu, softmax
from .network import DualBranchNet, FeedForwardNet, cross_entropy
from .optim import Adam
from .scaling import ZScoreScaler
from .training import TrainConfig, train_network

__all__ = [
    "Adam",
    "DenseLayer",
    "DualBranchNet",
    "FeedForwardNet",
    "TrainConfig",
    "ZScoreScaler",
    "apply_dropout",
    "cross_entropy",
    "glorot_uniform",
    "relu",
    "softmax",
    "train_network",
]
