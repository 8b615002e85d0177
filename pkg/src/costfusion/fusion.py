"""Max Voting, Average, AF and CS-AF fusion of classifier posteriors.

All methods share array kernels that work on a (k, n, m) posterior tensor;
the single-sample functions route through the same kernels with n = 1 so
batch and per-sample results agree bit for bit.

Ties in the final argmax go to the lowest class index. Max voting first
breaks vote ties by the larger summed posterior of the tied classes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import metrics
from .core import ClassSchema, CostMatrix, PredictionSet, as_decision_matrix
from .costmat import uniform_cost_matrix
from .weights import ObjectiveWeightReport, combine_weights, individuality_batch, minmax_normalize, objective_weights

METHODS = ("max_voting", "average", "af", "cs_af")


@dataclass(frozen=True)
class FusedDecision:
    predicted_class: int
    fused_scores: np.ndarray
    weights_used: Optional[np.ndarray]

    def normalized_scores(self) -> np.ndarray:
        """Fused scores rescaled to sum to one, for reporting only."""
        s = self.fused_scores.sum()
        return self.fused_scores / s if s > 0 else self.fused_scores


# -- kernels over (k, n, m) ---------------------------------------------------

def _weighted_scores(probs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sum over classifiers of w[i, j] * probs[i, j, :]; w has shape (k, n)."""
    return (w[:, :, None] * probs).sum(axis=0)


def weighted_kernel(probs, w):
    if np.any(w < 0):
        raise ValueError("fusion weights must be non-negative")
    if np.any(w.sum(axis=0) <= 0):
        raise ValueError("fusion weights are all zero")
    scores = _weighted_scores(probs, w)
    return scores.argmax(axis=-1), scores, w


def average_kernel(probs):
    k, n, _ = probs.shape
    if k == 0:
        raise ValueError("need at least one classifier")
    return weighted_kernel(probs, np.full((k, n), 1.0 / k))


def active_kernel(probs, objective, alpha):
    objective = np.asarray(objective, dtype=float)
    if objective.shape != (probs.shape[0],):
        raise ValueError(f"expected {probs.shape[0]} objective weights, got shape {objective.shape}")
    subjective = minmax_normalize(individuality_batch(probs))
    w = combine_weights(objective, subjective, alpha)
    return weighted_kernel(probs, w)


def max_voting_kernel(probs):
    k, n, m = probs.shape
    if k == 0:
        raise ValueError("need at least one classifier")
    votes = probs.argmax(axis=-1)  # (k, n), lowest index within a classifier
    flat = (votes + m * np.arange(n)).ravel()
    counts = np.bincount(flat, minlength=n * m).reshape(n, m).astype(float)
    summed = probs.sum(axis=0)
    tied = counts == counts.max(axis=-1, keepdims=True)
    pred = np.where(tied, summed, -np.inf).argmax(axis=-1)
    return pred, counts, None


def _single(kernel, P, *args):
    P = as_decision_matrix(P)
    pred, scores, w = kernel(P[:, None, :], *args)
    return FusedDecision(int(pred[0]), scores[0], None if w is None else w[:, 0])


# -- single-sample API ----------------------------------------------------------

def fuse_weighted(P, w) -> FusedDecision:
    w = np.asarray(w, dtype=float)
    P = as_decision_matrix(P)
    if w.shape != (P.shape[0],):
        raise ValueError(f"expected {P.shape[0]} weights, got shape {w.shape}")
    return _single(weighted_kernel, P, w[:, None])


def fuse_average(P) -> FusedDecision:
    return _single(average_kernel, P)


def fuse_max_voting(P) -> FusedDecision:
    """Fused scores are the per-class vote counts."""
    return _single(max_voting_kernel, P)


def fuse_active(P, objective, alpha: float = 0.5) -> FusedDecision:
    """Active fusion; AF vs CS-AF differ only in how ``objective`` was built."""
    return _single(active_kernel, P, objective, alpha)


# -- engines ---------------------------------------------------------------------

@dataclass(frozen=True)
class FusionEngine:
    """A configured fusion method with frozen objective weights.

    Build AF / CS-AF engines with :meth:`fit` so the objective weights come
    from the validation split (AF uses the all-ones cost matrix).
    """

    method: str
    schema: ClassSchema
    objective: Optional[np.ndarray] = None
    alpha: float = 0.5
    report: Optional[ObjectiveWeightReport] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown fusion method {self.method!r}; choose from {METHODS}")
        if self.method in ("af", "cs_af"):
            if self.objective is None:
                raise ValueError(f"{self.method} needs objective weights")
            o = np.array(self.objective, dtype=float)
            o.setflags(write=False)
            object.__setattr__(self, "objective", o)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    @classmethod
    def fit(cls, method: str, val: PredictionSet, cost: Optional[CostMatrix] = None,
            alpha: float = 0.5) -> "FusionEngine":
        """Compute objective weights from a labeled validation split."""
        if method == "cs_af" and cost is None:
            raise ValueError("cs_af requires a cost matrix")
        if method == "af" and cost is not None:
            raise ValueError("af always uses the uniform cost matrix; use cs_af for a custom one")
        report = None
        objective = None
        if method in ("af", "cs_af"):
            if cost is None:
                cost = uniform_cost_matrix(val.m, val.schema.class_names)
            if cost.m != val.m:
                raise ValueError(f"cost matrix is {cost.m}x{cost.m}, pool has {val.m} classes")
            report = objective_weights(validation_confusions(val), cost)
            objective = report.weights
        return cls(method, val.schema, objective, alpha, report)

    def with_objective(self, idx) -> "FusionEngine":
        """Engine restricted to a subset of the classifier pool."""
        if self.objective is None:
            return self
        return FusionEngine(self.method, self.schema, self.objective[np.asarray(idx)], self.alpha)

    def decide(self, probs: np.ndarray):
        """Vectorized fusion of a (k, n, m) tensor -> (predictions, scores, weights)."""
        if self.method == "max_voting":
            return max_voting_kernel(probs)
        if self.method == "average":
            return average_kernel(probs)
        if probs.shape[0] != self.objective.shape[0]:
            raise ValueError(
                f"engine holds {self.objective.shape[0]} objective weights, got {probs.shape[0]} classifiers"
            )
        return active_kernel(probs, self.objective, self.alpha)

    def predict(self, probs: np.ndarray) -> np.ndarray:
        return self.decide(probs)[0]


def validation_confusions(val: PredictionSet) -> np.ndarray:
    """(k, m, m) confusion matrices of every classifier's argmax on the split."""
    labels = val.require_labels()
    preds = val.probs.argmax(axis=-1)
    return np.stack([metrics.confusion_matrix(p, labels, val.m) for p in preds])


def predict_batch(engine: FusionEngine, preds: PredictionSet) -> list:
    if preds.schema.class_names != engine.schema.class_names:
        raise ValueError("engine and prediction set use different class schemas")
    if preds.n == 0:
        return []
    pred, scores, w = engine.decide(preds.probs)
    return [
        FusedDecision(int(pred[j]), scores[j], None if w is None else w[:, j])
        for j in range(preds.n)
    ]
