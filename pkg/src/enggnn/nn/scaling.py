"""Column-wise z-score standardization fitted on training data."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_fitted, check_matrix


class ZScoreScaler(TransformerMixin, BaseEstimator):
    """Standardize columns to zero mean and unit sample standard deviation (ddof=1).

    Constant columns would divide by zero, so their scale is forced to 1.0
    (they transform to exactly zero) and ``fit`` emits a warning.
    """

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        if X.shape[0] < 2:
            raise ValueError("need at least two rows to estimate a standard deviation")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0, ddof=1)
        constant = scale == 0.0
        if constant.any():
            warnings.warn(
                f"{int(constant.sum())} constant column(s) found; scale forced to 1.0",
                UserWarning,
                stacklevel=2,
            )
            scale = scale.copy()
            scale[constant] = 1.0
        self.scale_ = scale
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_fitted(self, "mean_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns but the scaler was fitted on {self.n_features_in_}"
            )
        return (X - self.mean_) / self.scale_
