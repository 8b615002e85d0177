"""Random-subset fusion experiments.

For every subset size N and repetition r a classifier subset is drawn
without replacement from the stream (seed, N, r). Every method is evaluated
on that same subset, so comparisons are paired.
"""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import metrics
from .core import CostMatrix, PredictionSet
from .fusion import FusionEngine

DEFAULT_N_LIST = (8, 16, 24, 32, 40, 48, 56, 64, 72, 80, 88, 96)
DEFAULT_REPETITIONS = 100


@dataclass(frozen=True)
class Method:
    """A named fusion contestant; ``cost`` names a cost matrix for cs_af."""

    kind: str
    cost: Optional[str] = None

    @property
    def label(self) -> str:
        return f"cs_af({self.cost})" if self.kind == "cs_af" else self.kind

    @classmethod
    def parse(cls, label: str) -> "Method":
        label = label.strip().replace("-", "_")
        mt = re.fullmatch(r"cs_af\((.+)\)", label)
        if mt:
            return cls("cs_af", mt.group(1))
        if label in ("max_voting", "average", "af"):
            return cls(label)
        raise ValueError(f"unrecognized method {label!r}")


def standard_methods(cost_names: Sequence[str] = ()) -> list:
    """Max Voting, Average, AF, and one CS-AF per named cost matrix."""
    return [Method("max_voting"), Method("average"), Method("af")] + [Method("cs_af", c) for c in cost_names]


def build_engines(methods: Sequence[Method], val: PredictionSet, cost_matrices: Mapping[str, CostMatrix],
                  alpha: float = 0.5) -> dict:
    engines = {}
    for meth in methods:
        cost = None
        if meth.kind == "cs_af":
            if meth.cost not in cost_matrices:
                raise ValueError(f"method {meth.label} refers to unknown cost matrix {meth.cost!r}")
            cost = cost_matrices[meth.cost]
        engines[meth.label] = FusionEngine.fit(meth.kind, val, cost, alpha)
    return engines


def draw_subset(seed: int, n: int, rep: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, rep)))
    return np.sort(rng.choice(k, size=n, replace=False))


@dataclass(frozen=True)
class Trial:
    """One (method, N, repetition) evaluation."""

    method: str
    n: int
    rep: int
    subset: tuple
    confusion: np.ndarray
    accuracy: float
    costs: dict


@dataclass
class ExperimentReport:
    config: dict
    methods: list
    n_list: list
    cost_names: list
    class_names: list
    trials: list = field(default_factory=list)

    def select(self, method: str, n: int) -> list:
        return [t for t in self.trials if t.method == method and t.n == n]

    def summary(self) -> list:
        """Mean and population std per (method, N), in method-major order."""
        rows = []
        for meth in self.methods:
            for n in self.n_list:
                ts = self.select(meth, n)
                acc = np.array([t.accuracy for t in ts])
                row = {"method": meth, "N": n, "repetitions": len(ts),
                       "accuracy_mean": float(acc.mean()), "accuracy_std": float(acc.std())}
                for c in self.cost_names:
                    v = np.array([t.costs[c] for t in ts])
                    row[f"cost_{c}_mean"] = float(v.mean())
                    row[f"cost_{c}_std"] = float(v.std())
                sens, spec = [], []
                for t in ts:
                    rates = metrics.per_class_rates(t.confusion)
                    sens.append([np.nan if r["sensitivity"] is None else r["sensitivity"] for r in rates])
                    spec.append([np.nan if r["specificity"] is None else r["specificity"] for r in rates])
                row["sensitivity_mean"] = _nanmean_cols(sens)
                row["specificity_mean"] = _nanmean_cols(spec)
                rows.append(row)
        return rows

    def curve_rows(self) -> list:
        """Flat rows (one per method and N) for plotting accuracy and cost curves."""
        out = []
        for row in self.summary():
            flat = {k: v for k, v in row.items() if not isinstance(v, list)}
            for i, name in enumerate(self.class_names):
                flat[f"sensitivity_{name}"] = row["sensitivity_mean"][i]
                flat[f"specificity_{name}"] = row["specificity_mean"][i]
            out.append(flat)
        return out

    def to_dict(self, include_trials: bool = True) -> dict:
        d = {
            "config": self.config,
            "methods": self.methods,
            "N_list": self.n_list,
            "cost_matrices": self.cost_names,
            "classes": self.class_names,
            "summary": self.summary(),
        }
        if include_trials:
            d["trials"] = [
                {"method": t.method, "N": t.n, "rep": t.rep, "subset": list(t.subset),
                 "accuracy": t.accuracy, "costs": t.costs, "confusion": t.confusion.tolist()}
                for t in self.trials
            ]
        return d


def _nanmean_cols(rows) -> list:
    a = np.array(rows, dtype=float)
    out = []
    for col in a.T:
        ok = col[~np.isnan(col)]
        out.append(float(ok.mean()) if ok.size else None)
    return out


def run_subset_experiment(val: PredictionSet, test: PredictionSet, methods: Sequence[Method],
                          n_list: Sequence[int] = DEFAULT_N_LIST, repetitions: int = DEFAULT_REPETITIONS,
                          seed: int = 0, cost_matrices: Optional[Mapping[str, CostMatrix]] = None,
                          alpha: float = 0.5, workers: Optional[int] = None) -> ExperimentReport:
    """Evaluate every method on random classifier subsets of each size in ``n_list``.

    Objective weights are fitted once on the full validation pool; a subset
    just selects its members' weights.
    """
    cost_matrices = dict(cost_matrices or {})
    methods = list(methods)
    if not methods:
        raise ValueError("empty method list")
    labels = [m.label for m in methods]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate methods: {labels}")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if val.classifier_ids != test.classifier_ids:
        raise ValueError("validation and test splits list different classifiers")
    k = test.k
    bad = [n for n in n_list if not 1 <= n <= k]
    if bad:
        raise ValueError(f"subset sizes {bad} outside 1..{k}")
    truth = test.require_labels()
    engines = build_engines(methods, val, cost_matrices, alpha)
    m = test.m

    def one(task):
        n, rep = task
        subset = draw_subset(seed, n, rep, k)
        probs = test.probs[subset]
        out = []
        for label, engine in engines.items():
            pred = engine.with_objective(subset).predict(probs)
            cm = metrics.confusion_matrix(pred, truth, m)
            costs = {c: metrics.total_cost(cm, cost_matrices[c]) for c in cost_matrices}
            out.append(Trial(label, n, rep, tuple(int(i) for i in subset), cm, metrics.accuracy(cm), costs))
        return out

    tasks = [(n, rep) for n in n_list for rep in range(repetitions)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, tasks))
    else:
        results = [one(t) for t in tasks]

    report = ExperimentReport(
        config={"seed": seed, "repetitions": repetitions, "alpha": alpha, "k": k, "n_test": test.n},
        methods=labels,
        n_list=list(n_list),
        cost_names=list(cost_matrices),
        class_names=list(test.schema.class_names),
    )
    for chunk in results:
        report.trials.extend(chunk)
    return report


def monotone_violations(report: ExperimentReport, slack: float = 0.0) -> list:
    """(method, N_prev, N_next, drop) wherever mean accuracy falls by more than ``slack``."""
    out = []
    rows = report.summary()
    for meth in report.methods:
        means = [(r["N"], r["accuracy_mean"]) for r in rows if r["method"] == meth]
        means.sort()
        for (n0, a0), (n1, a1) in zip(means, means[1:]):
            if a1 < a0 - slack:
                out.append((meth, n0, n1, a0 - a1))
    return out


def per_class_report(engines: Mapping[str, FusionEngine], preds: PredictionSet,
                     cost_matrices: Optional[Mapping[str, CostMatrix]] = None) -> dict:
    """Per-class sensitivity/specificity and total costs for each engine on a labeled split."""
    truth = preds.require_labels()
    cost_matrices = dict(cost_matrices or {})
    names = preds.schema.class_names
    out = {}
    for label, engine in engines.items():
        cm = metrics.confusion_matrix(engine.predict(preds.probs), truth, preds.m)
        rates = metrics.per_class_rates(cm)
        out[label] = {
            "confusion": cm.tolist(),
            "accuracy": metrics.accuracy(cm),
            "total_cost": {c: metrics.total_cost(cm, cost_matrices[c]) for c in cost_matrices},
            "per_class": [{"class": names[i], **rates[i]} for i in range(preds.m)],
        }
    return out
