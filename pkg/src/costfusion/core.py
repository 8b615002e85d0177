"""Shared domain types: class schemas, decision vectors/matrices, prediction sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

# Ingestion tolerance for decision-vector sums; renormalized rows must meet POST_RENORM_TOL.
PROB_TOL = 1e-6
POST_RENORM_TOL = 1e-12

# ISIC 2019 column order and the clinical severity ranking (most severe first).
ISIC_CLASSES = ("MEL", "NV", "BCC", "AK", "BKL", "DF", "VASC", "SCC")
ISIC_SEVERITY = ("MEL", "SCC", "BCC", "NV", "AK", "DF", "VASC", "BKL")


class InvalidDecisionVector(ValueError):
    """A posterior vector is outside [0, 1] or does not sum to one."""


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ClassSchema:
    """Ordered class labels plus a severity rank per class (0 = most severe).

    Matrices are always indexed in ``class_names`` order; severity is only an
    attribute used to build cost matrices and to pick out severe classes.
    """

    class_names: tuple
    severity_rank: tuple

    def __post_init__(self):
        names = tuple(str(n) for n in self.class_names)
        ranks = tuple(int(r) for r in self.severity_rank)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "severity_rank", ranks)
        if len(names) < 2:
            raise ValueError(f"need at least 2 classes, got {len(names)}")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate class names: {dup}")
        if sorted(ranks) != list(range(len(names))):
            raise ValueError(f"severity_rank {ranks} is not a permutation of 0..{len(names) - 1}")

    @classmethod
    def from_severity(cls, class_names: Sequence[str], severity: Sequence[str]) -> "ClassSchema":
        """Build from class names and a most-to-least severe listing of the same names."""
        names = list(class_names)
        sev = list(severity)
        unknown = [s for s in sev if s not in names]
        if unknown:
            raise ValueError(f"unknown class in severity list: {unknown}")
        if sorted(sev) != sorted(names):
            missing = [n for n in names if n not in sev]
            raise ValueError(f"severity list is not a permutation of the classes (missing {missing})")
        return cls(tuple(names), tuple(sev.index(n) for n in names))

    @classmethod
    def isic(cls) -> "ClassSchema":
        return cls.from_severity(ISIC_CLASSES, ISIC_SEVERITY)

    @property
    def m(self) -> int:
        return len(self.class_names)

    @property
    def severity_order(self) -> tuple:
        """Class names sorted from most to least severe."""
        return tuple(sorted(self.class_names, key=lambda n: self.severity_rank[self.class_names.index(n)]))

    def index(self, name: str) -> int:
        return self.class_names.index(name)

    def class_with_rank(self, rank: int) -> int:
        """Class index holding the given severity rank."""
        return self.severity_rank.index(rank)

    def reversed(self) -> "ClassSchema":
        """Same classes with the severity ranking turned upside down."""
        m = self.m
        return ClassSchema(self.class_names, tuple(m - 1 - r for r in self.severity_rank))

    def to_dict(self) -> dict:
        return {"classes": list(self.class_names), "severity": list(self.severity_order)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassSchema":
        return cls.from_severity(d["classes"], d["severity"])


def check_decision_vector(v, tolerance: float = PROB_TOL) -> Optional[str]:
    """Return None when ``v`` is a valid posterior vector, else a description of the violation."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        return f"expected a non-empty 1-d vector, got shape {v.shape}"
    if not np.all(np.isfinite(v)):
        i = int(np.flatnonzero(~np.isfinite(v))[0])
        return f"entry {i} is not finite ({v[i]!r})"
    bad = np.flatnonzero((v < 0) | (v > 1))
    if bad.size:
        i = int(bad[0])
        return f"entry {i} = {v[i]!r} outside [0, 1]"
    s = float(v.sum())
    if abs(s - 1.0) > tolerance:
        return f"entries sum to {s!r} (|sum - 1| = {abs(s - 1.0):.3g} > {tolerance:g})"
    return None


def validate_decision_vector(v, tolerance: float = PROB_TOL) -> np.ndarray:
    """Raise InvalidDecisionVector unless ``v`` is a valid posterior vector."""
    msg = check_decision_vector(v, tolerance)
    if msg is not None:
        raise InvalidDecisionVector(msg)
    return np.asarray(v, dtype=float)


def renormalize(v) -> np.ndarray:
    """Scale a non-negative vector so it sums to one."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise InvalidDecisionVector("cannot renormalize a vector with negative or non-finite entries")
    s = v.sum()
    if s <= 0:
        raise InvalidDecisionVector("cannot renormalize an all-zero vector")
    return v / s


def as_decision_matrix(rows, tolerance: float = PROB_TOL) -> np.ndarray:
    """Validate a k x m stack of decision vectors (one row per classifier)."""
    P = np.asarray(rows, dtype=float)
    if P.ndim != 2 or P.shape[0] < 1:
        raise ValueError(f"decision matrix must be k x m with k >= 1, got shape {P.shape}")
    for i, row in enumerate(P):
        msg = check_decision_vector(row, tolerance)
        if msg is not None:
            raise InvalidDecisionVector(f"row {i}: {msg}")
    return P


def validate_probability_tensor(probs: np.ndarray, tolerance: float = PROB_TOL) -> None:
    """Vectorized validity check over the last axis of any posterior array."""
    if not np.all(np.isfinite(probs)):
        raise InvalidDecisionVector("non-finite posterior values")
    if probs.size and (probs.min() < 0 or probs.max() > 1):
        raise InvalidDecisionVector("posterior values outside [0, 1]")
    dev = np.abs(probs.sum(axis=-1) - 1.0)
    if dev.size and dev.max() > tolerance:
        idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise InvalidDecisionVector(f"decision vector at {idx} sums off by {dev.max():.3g}")


@dataclass(frozen=True)
class CostMatrix:
    """Positive m x m cost table; cell (p, q) prices predicting true class p as q."""

    costs: np.ndarray
    class_names: tuple = ()

    def __post_init__(self):
        c = _frozen(self.costs)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValueError(f"cost matrix must be square with m >= 2, got shape {c.shape}")
        if not np.all(c > 0):
            raise ValueError("all costs must be strictly positive")
        diag = np.diag(c)
        if np.any(c < diag[:, None]):
            p, q = np.argwhere(c < diag[:, None])[0]
            raise ValueError(f"correct-prediction cost c[{p},{p}]={diag[p]} exceeds error cost c[{p},{q}]={c[p, q]}")
        names = tuple(self.class_names) or tuple(str(i) for i in range(c.shape[0]))
        if len(names) != c.shape[0]:
            raise ValueError("class_names length does not match cost matrix size")
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "class_names", names)

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.costs, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.costs, other.costs)

    __hash__ = None


def validate_confusion_matrix(cm, counts: bool = False) -> np.ndarray:
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise ValueError("confusion matrix cells must be non-negative")
    if counts:
        if not np.array_equal(cm, np.round(cm)):
            raise ValueError("count confusion matrix has non-integer cells")
        if cm.sum() <= 0:
            raise ValueError("count confusion matrix is empty")
    return cm


@dataclass(frozen=True)
class PredictionSet:
    """Posteriors of k classifiers over the same n samples of one split.

    ``probs`` has shape (k, n, m); ``labels`` holds true class indices or is None.
    """

    schema: ClassSchema
    classifier_ids: tuple
    sample_ids: tuple
    probs: np.ndarray
    labels: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        probs = _frozen(self.probs)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "classifier_ids", tuple(self.classifier_ids))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if probs.ndim != 3:
            raise ValueError(f"probs must have shape (k, n, m), got {probs.shape}")
        k, n, m = probs.shape
        if m != self.schema.m:
            raise ValueError(f"probs have {m} classes, schema has {self.schema.m}")
        if len(self.classifier_ids) != k:
            raise ValueError("classifier_ids length does not match probs")
        if len(set(self.classifier_ids)) != k:
            raise ValueError("duplicate classifier ids")
        if len(self.sample_ids) != n:
            raise ValueError("sample_ids length does not match probs")
        if len(set(self.sample_ids)) != n:
            raise ValueError("duplicate sample ids")
        if self.labels is not None:
            labels = _frozen(self.labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
            if n and (labels.min() < 0 or labels.max() >= m):
                raise ValueError("labels contain out-of-range class indices")
            object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    @property
    def n(self) -> int:
        return self.probs.shape[1]

    @property
    def m(self) -> int:
        return self.probs.shape[2]

    def subset(self, classifiers) -> "PredictionSet":
        """Restrict to the given classifier indices (in the given order)."""
        idx = np.asarray(classifiers, dtype=np.int64)
        return PredictionSet(
            self.schema,
            tuple(self.classifier_ids[i] for i in idx),
            self.sample_ids,
            self.probs[idx],
            self.labels,
        )

    def decision_matrix(self, sample: int) -> np.ndarray:
        """The k x m decision matrix of one sample."""
        return self.probs[:, sample, :]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("prediction set has no true labels")
        return self.labels
