"""Objective (validation-time) and subjective (per-sample) classifier weights."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import metrics
from .core import validate_confusion_matrix

OBJECTIVE_FLOOR = 1e-6
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class ObjectiveWeightReport:
    """Per-classifier audit trail of the objective weights."""

    confusion: np.ndarray  # (k, m, m) validation counts
    adjusted: np.ndarray  # (k, m, m) cost-weighted
    micro_f1: np.ndarray  # (k,)
    weights: np.ndarray  # (k,), floored into (0, 1]
    cost: np.ndarray  # (m, m)

    def to_dict(self, classifier_ids: Sequence[str] = ()) -> dict:
        ids = list(classifier_ids) or [str(i) for i in range(len(self.weights))]
        return {
            "cost_matrix": self.cost.tolist(),
            "classifiers": [
                {
                    "id": cid,
                    "confusion": self.confusion[i].tolist(),
                    "cost_adjusted": self.adjusted[i].tolist(),
                    "micro_f1": float(self.micro_f1[i]),
                    "objective_weight": float(self.weights[i]),
                }
                for i, cid in enumerate(ids)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectiveWeightReport":
        rows = d["classifiers"]
        return cls(
            confusion=np.array([r["confusion"] for r in rows], dtype=float),
            adjusted=np.array([r["cost_adjusted"] for r in rows], dtype=float),
            micro_f1=np.array([r["micro_f1"] for r in rows], dtype=float),
            weights=np.array([r["objective_weight"] for r in rows], dtype=float),
            cost=np.array(d["cost_matrix"], dtype=float),
        )


def objective_weights(val_cms, cost) -> ObjectiveWeightReport:
    """Micro-F1 of each cost-adjusted validation confusion matrix.

    Parameters
    ----------
    val_cms : sequence of (m, m) arrays
        Validation confusion matrices, one per classifier.
    cost : CostMatrix or (m, m) array
        Pass the all-ones matrix to skip cost sensitivity.
    """
    cms = [validate_confusion_matrix(cm) for cm in val_cms]
    if not cms:
        raise ValueError("need at least one confusion matrix")
    cost = np.asarray(cost, dtype=float)
    adjusted = np.stack([metrics.cost_adjust(cm, cost) for cm in cms])
    f1 = np.array([metrics.micro_f1(a) for a in adjusted])
    return ObjectiveWeightReport(
        confusion=np.stack(cms),
        adjusted=adjusted,
        micro_f1=f1,
        weights=np.maximum(f1, OBJECTIVE_FLOOR),
        cost=cost,
    )


def individuality(v) -> float:
    """Mean gap between the top posterior and every entry, scaled by 1/(m-1).

    0 for a uniform vector, 1 for a one-hot vector.
    """
    v = np.asarray(v, dtype=float)
    m = v.shape[-1]
    if m < 2:
        raise ValueError("individuality needs at least 2 classes")
    top = v.max()
    return float(sum(top - p for p in v) / (m - 1))


def individuality_batch(probs: np.ndarray) -> np.ndarray:
    """Individuality over the last axis of an array of decision vectors."""
    m = probs.shape[-1]
    if m < 2:
        raise ValueError("individuality needs at least 2 classes")
    return (probs.max(axis=-1, keepdims=True) - probs).sum(axis=-1) / (m - 1)


def minmax_normalize(ind: np.ndarray) -> np.ndarray:
    """Min-max normalize along axis 0 (the classifier axis).

    Columns whose spread is within DEGENERATE_TOL (identical individualities,
    or a single classifier) get weight 1 everywhere.
    """
    lo = ind.min(axis=0)
    hi = ind.max(axis=0)
    span = hi - lo
    degenerate = span <= DEGENERATE_TOL
    safe = np.where(degenerate, 1.0, span)
    return np.where(degenerate, 1.0, (ind - lo) / safe)


def subjective_weights(P) -> np.ndarray:
    """Per-classifier subjective weights for one k x m decision matrix."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] < 1:
        raise ValueError(f"expected a k x m decision matrix, got shape {P.shape}")
    return minmax_normalize(individuality_batch(P))


def combine_weights(objective, subjective, alpha: float = 0.5) -> np.ndarray:
    """``alpha * O + (1 - alpha) * S``; broadcasting lets S carry a sample axis."""
    o = np.asarray(objective, dtype=float)
    s = np.asarray(subjective, dtype=float)
    if o.shape[0] != s.shape[0]:
        raise ValueError(f"length mismatch: {o.shape[0]} objective vs {s.shape[0]} subjective weights")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if s.ndim > o.ndim:
        o = o.reshape(o.shape + (1,) * (s.ndim - o.ndim))
    return alpha * o + (1.0 - alpha) * s
