"""Seeded synthetic classifier pools.

Each classifier has a target accuracy. Per sample it picks a target class
(the true class with that probability, otherwise another class) and emits
``p ∝ u + beta * onehot(target)`` with ``u ~ U(0, 1)^m``; ``beta`` is larger
when the target is correct, so confidence tracks correctness.

Random streams are keyed by (seed, purpose, classifier, split) through
``numpy.random.SeedSequence`` spawn keys, so output does not depend on the
order or parallelism of generation.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ClassSchema, PredictionSet

SPLITS = {"val": 0, "test": 1}
_LABEL_STREAM, _ACC_STREAM, _PRED_STREAM = 0, 1, 2


@dataclass(frozen=True)
class SyntheticPoolSpec:
    seed: int
    k: int
    schema: ClassSchema
    n_val: int = 1600
    n_test: int = 4000
    accuracy_range: tuple = (0.55, 0.85)
    sharpness_correct: float = 4.0
    sharpness_wrong: float = 1.5
    confusion_bias: tuple = ()  # (classifier, from_class, to_class, extra_probability)

    def __post_init__(self):
        lo, hi = self.accuracy_range
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"accuracy_range must satisfy 0 < lo <= hi <= 1, got {self.accuracy_range}")
        if self.sharpness_correct <= 0 or self.sharpness_wrong <= 0:
            raise ValueError("sharpness values must be positive")
        if self.k < 1:
            raise ValueError("need at least one classifier")
        if self.n_val < 0 or self.n_test < 0:
            raise ValueError("sample counts must be non-negative")
        bias = tuple(tuple(b) for b in self.confusion_bias)
        m = self.schema.m
        for clf, src, dst, p in bias:
            if not 0 <= clf < self.k:
                raise ValueError(f"bias classifier index {clf} outside 0..{self.k - 1}")
            if not (0 <= src < m and 0 <= dst < m) or src == dst:
                raise ValueError(f"bias ({src} -> {dst}) must name two distinct classes")
            if not 0 <= p <= 1:
                raise ValueError(f"bias probability {p} outside [0, 1]")
        object.__setattr__(self, "confusion_bias", bias)
        object.__setattr__(self, "accuracy_range", (float(lo), float(hi)))


@dataclass(frozen=True)
class SyntheticPool:
    val: PredictionSet
    test: PredictionSet
    accuracies: np.ndarray  # per-classifier target accuracy


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def severe_to_benign_bias(schema: ClassSchema, classifiers: Sequence[int], probability: float,
                          n_severe: int = 3) -> tuple:
    """Bias list sending each of the ``n_severe`` most severe classes to its mirror-rank benign class."""
    m = schema.m
    out = []
    for clf in classifiers:
        for r in range(min(n_severe, m // 2)):
            out.append((int(clf), schema.class_with_rank(r), schema.class_with_rank(m - 1 - r), float(probability)))
    return tuple(out)


def classifier_accuracies(spec: SyntheticPoolSpec) -> np.ndarray:
    lo, hi = spec.accuracy_range
    return np.array([_rng(spec.seed, _ACC_STREAM, i).uniform(lo, hi) for i in range(spec.k)])


def _labels(spec: SyntheticPoolSpec, split: str, n: int) -> np.ndarray:
    return _rng(spec.seed, _LABEL_STREAM, SPLITS[split]).integers(0, spec.schema.m, n)


def _classifier_split(spec: SyntheticPoolSpec, i: int, acc: float, split: str, labels: np.ndarray) -> np.ndarray:
    m = spec.schema.m
    n = labels.shape[0]
    rng = _rng(spec.seed, _PRED_STREAM, i, SPLITS[split])
    correct = rng.random(n) < acc
    wrong = (labels + rng.integers(1, m, n)) % m
    target = np.where(correct, labels, wrong)

    u_bias = rng.random(n)
    cum = np.zeros(n)
    for clf, src, dst, p in spec.confusion_bias:
        if clf != i:
            continue
        hit = (labels == src) & (u_bias >= cum) & (u_bias < cum + p)
        target = np.where(hit, dst, target)
        cum = np.where(labels == src, cum + p, cum)

    g = rng.random((n, m))
    beta = np.where(target == labels, spec.sharpness_correct, spec.sharpness_wrong)
    g[np.arange(n), target] += beta
    return g / g.sum(axis=1, keepdims=True)


def generate_pool(spec: SyntheticPoolSpec, workers: Optional[int] = None) -> SyntheticPool:
    accs = classifier_accuracies(spec)
    ids = tuple(f"clf{i:03d}" for i in range(spec.k))
    splits = {}
    for split, n in (("val", spec.n_val), ("test", spec.n_test)):
        labels = _labels(spec, split, n)

        def one(i, split=split, labels=labels):
            return _classifier_split(spec, i, accs[i], split, labels)

        if workers and workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                probs = list(ex.map(one, range(spec.k)))
        else:
            probs = [one(i) for i in range(spec.k)]
        splits[split] = PredictionSet(
            spec.schema,
            ids,
            tuple(f"{split}_{j:06d}" for j in range(n)),
            np.stack(probs) if probs else np.empty((0, n, spec.schema.m)),
            labels,
        )
    return SyntheticPool(splits["val"], splits["test"], accs)
