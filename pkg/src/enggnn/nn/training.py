"""Mini-batch training loop with early stopping on the training loss."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import cross_entropy
from .optim import Adam


@dataclass
class TrainConfig:
    """Optimization settings for the feedforward classifiers.

    ``epochs=0`` builds/initializes without taking any update step, which is
    the supported way to inspect an untrained network.
    """

    learning_rate: float = 1e-4
    epochs: int = 50
    batch_size: int = 16
    dropout_rate: float = 0.2
    early_stop_patience: int = 5
    early_stop_min_delta: float = 1e-5

    def __post_init__(self):
        if self.learning_rate < 0.0:
            raise ValueError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.early_stop_patience < 1:
            raise ValueError(f"early_stop_patience must be positive, got {self.early_stop_patience}")
        if self.early_stop_min_delta < 0.0:
            raise ValueError(f"early_stop_min_delta must be non-negative, got {self.early_stop_min_delta}")


def train_network(net, x, onehot, config: TrainConfig, rng: np.random.Generator):
    """Adam training on shuffled mini-batches; returns per-epoch mean losses.

    The samples are reshuffled every epoch; a short final batch is kept. The
    epoch loss is the sample-weighted mean of the per-batch training losses
    (computed with dropout active). Training stops early once the epoch loss
    has failed to beat the best seen by more than ``early_stop_min_delta`` for
    ``early_stop_patience`` consecutive epochs.
    """
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if onehot.shape[0] != n:
        raise ValueError("x and onehot row counts differ")
    optimizer = Adam(net.parameters(), learning_rate=config.learning_rate)
    masks = net.parameter_masks()
    history: list[float] = []
    best = np.inf
    stale = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            probs, caches = net.forward(
                x[batch], training=True, dropout_rate=config.dropout_rate, rng=rng
            )
            loss = cross_entropy(probs, onehot[batch])
            grads = net.backward(caches, probs, onehot[batch])
            optimizer.step(grads, masks)
            total += loss * batch.size
        epoch_loss = total / n
        history.append(epoch_loss)
        if epoch_loss < best - config.early_stop_min_delta:
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale >= config.early_stop_patience:
                break
    return history
