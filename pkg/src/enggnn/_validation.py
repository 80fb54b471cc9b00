"""Shared input-validation helpers for estimators and algorithm functions."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a finite 2-D float64 array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_labels(y, n_rows: int | None = None):
    """Coerce labels to a 1-D array; returns ``(labels, sorted unique classes)``.

    At most two distinct values are allowed.
    """
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"y must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("y is empty")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ValueError(f"y has {arr.shape[0]} entries but X has {n_rows} rows")
    classes = np.unique(arr)
    if classes.size > 2:
        raise ValueError(f"expected at most two classes, found {classes.size}")
    return arr, classes


def check_rng(random_state) -> np.random.Generator:
    """Return a numpy Generator from an int seed, a SeedSequence, a Generator, or None."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def check_fitted(estimator, attribute: str) -> None:
    """Raise NotFittedError unless ``estimator`` carries the given fitted attribute."""
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; "
            "call fit before using this method."
        )
