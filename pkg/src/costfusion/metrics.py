"""Confusion matrices and the scalar metrics derived from them.

Rows are true classes, columns predicted classes. Cost-weighted matrices are
treated as fractional counts.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import validate_confusion_matrix


def confusion_matrix(predicted, truth, m: int) -> np.ndarray:
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError(f"predicted and truth must be equal-length 1-d arrays ({predicted.shape} vs {truth.shape})")
    for name, a in (("predicted", predicted), ("truth", truth)):
        if a.size and (a.min() < 0 or a.max() >= m):
            raise ValueError(f"{name} contains class indices outside 0..{m - 1}")
    return np.bincount(truth * m + predicted, minlength=m * m).reshape(m, m).astype(float)


def cost_adjust(cm, cost) -> np.ndarray:
    """Element-wise product of a confusion matrix and a cost matrix."""
    cm = np.asarray(cm, dtype=float)
    c = np.asarray(cost, dtype=float)
    if cm.shape != c.shape:
        raise ValueError(f"dimension mismatch: confusion {cm.shape} vs cost {c.shape}")
    return cm * c


def _total(cm) -> tuple:
    cm = validate_confusion_matrix(cm)
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix has zero total")
    return cm, total


def micro_f1(wcm) -> float:
    """Micro-averaged F1; with FP = FN pooled over classes this is trace / total."""
    wcm, total = _total(wcm)
    return float(np.trace(wcm) / total)


def micro_f1_pooled(wcm) -> float:
    """Micro-F1 from pooled one-vs-rest TP, FP and FN counts."""
    wcm, _ = _total(wcm)
    tp = fp = fn = 0.0
    for c in range(wcm.shape[0]):
        tp += wcm[c, c]
        fp += wcm[:, c].sum() - wcm[c, c]
        fn += wcm[c, :].sum() - wcm[c, c]
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    if precision + recall == 0:
        return 0.0
    return float(2 * precision * recall / (precision + recall))


def accuracy(cm) -> float:
    cm, total = _total(cm)
    return float(np.trace(cm) / total)


def total_cost(cm, cost) -> float:
    return float(cost_adjust(cm, cost).sum())


def sensitivity(cm, c: int) -> Optional[float]:
    """TP / (TP + FN) for class ``c``; None when the class has no true samples."""
    cm = validate_confusion_matrix(cm)
    row = cm[c, :].sum()
    if row <= 0:
        return None
    return float(cm[c, c] / row)


def specificity(cm, c: int) -> Optional[float]:
    """TN / (TN + FP) for class ``c``; None when no sample lies outside the class."""
    cm = validate_confusion_matrix(cm)
    total = cm.sum()
    tp = cm[c, c]
    row, col = cm[c, :].sum(), cm[:, c].sum()
    tn = total - row - col + tp
    fp = col - tp
    if tn + fp <= 0:
        return None
    return float(tn / (tn + fp))


def per_class_rates(cm) -> list:
    """One dict per class with ``sensitivity`` and ``specificity`` (None if undefined)."""
    cm = validate_confusion_matrix(cm)
    return [
        {"sensitivity": sensitivity(cm, c), "specificity": specificity(cm, c)}
        for c in range(cm.shape[0])
    ]
