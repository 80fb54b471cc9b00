"""Binary classification metrics, ranking scores, and Welch's t-test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr
from scipy.stats import rankdata


def _check_binary(y, name: str = "y_true") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isin(arr, (0, 1))):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def _check_scores(scores, n: int) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size != n:
        raise ValueError(f"scores must be 1-D with {n} entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores contain NaN or infinite entries")
    return arr


def confusion_counts(y_true, y_pred):
    """(tp, fp, tn, fn) for 0/1 labels and predictions."""
    y_true = _check_binary(y_true, "y_true")
    y_pred = _check_binary(np.asarray(y_pred), "y_pred")
    if y_pred.size != y_true.size:
        raise ValueError("y_true and y_pred lengths differ")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return tp, fp, tn, fn


def classification_metrics(y_true, y_pred) -> dict:
    """Accuracy, precision, recall and F1 with zero-denominator conventions.

    Precision is 0 with no positive predictions, recall is 0 with no positive
    labels, and F1 is 0 when precision + recall is 0.
    """
    tp, fp, tn, fn = confusion_counts(y_true, y_pred)
    total = tp + fp + tn + fn
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0.0
        else 0.0
    )
    return {
        "accuracy": (tp + tn) / total,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


def roc_auc(y_true, scores) -> float:
    """Probability that a random positive outscores a random negative.

    Computed in Mann-Whitney rank form, so tied scores count one half.
    Requires both classes to be present.
    """
    y_true = _check_binary(y_true)
    scores = _check_scores(scores, y_true.size)
    n_pos = int(y_true.sum())
    n_neg = y_true.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC requires both classes in y_true")
    ranks = rankdata(scores)
    return float((ranks[y_true == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def pr_auc(y_true, scores) -> float:
    """Average precision over descending score thresholds.

    Tied scores enter as one block: AP = sum over distinct thresholds of
    precision-at-threshold times the recall increment. Requires at least one
    positive label; with all scores equal this degrades to the positive
    prevalence.
    """
    y_true = _check_binary(y_true)
    scores = _check_scores(scores, y_true.size)
    n_pos = int(y_true.sum())
    if n_pos == 0:
        raise ValueError("PR-AUC requires at least one positive label")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    true_pos = np.cumsum(y_true[order])
    block_ends = np.nonzero(np.append(sorted_scores[1:] != sorted_scores[:-1], True))[0]
    precision = true_pos[block_ends] / (block_ends + 1.0)
    recall = true_pos[block_ends] / n_pos
    previous_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - previous_recall) * precision))


def percentile_rank(scores) -> np.ndarray:
    """Average-rank percentiles in (0, 1]: rank/n, tied values sharing their mean rank."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("scores must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores contain NaN or infinite entries")
    return rankdata(arr) / arr.size


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    df: float
    p_value: float


def welch_t_test(sample_a, sample_b) -> WelchResult:
    """Two-sided Welch's t-test (unequal variances, Satterthwaite df).

    Zero-variance degenerate cases: equal means give (t=0, p=1); unequal means
    give (t=+/-inf, p=0); df falls back to n_a + n_b - 2.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("samples must be 1-D")
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two observations")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples contain NaN or infinite entries")
    sem_a = a.var(ddof=1) / a.size
    sem_b = b.var(ddof=1) / b.size
    pooled = sem_a + sem_b
    mean_diff = a.mean() - b.mean()
    if pooled == 0.0:
        df = float(a.size + b.size - 2)
        if mean_diff == 0.0:
            return WelchResult(0.0, df, 1.0)
        return WelchResult(math.copysign(math.inf, mean_diff), df, 0.0)
    statistic = mean_diff / math.sqrt(pooled)
    df = pooled ** 2 / (sem_a ** 2 / (a.size - 1) + sem_b ** 2 / (b.size - 1))
    p_value = 2.0 * float(stdtr(df, -abs(statistic)))
    return WelchResult(float(statistic), float(df), p_value)
