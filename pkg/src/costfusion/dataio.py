"""Manifests, prediction/label CSVs, cost-matrix CSVs and reports.

A pool on disk is a JSON manifest::

    {"classes": [...], "severity": [...most to least severe...],
     "labels": {"val": "labels_val.csv", "test": "labels_test.csv"},
     "classifiers": [{"id": "clf000", "val": "val/clf000.csv", "test": "test/clf000.csv"}, ...]}

with paths relative to the manifest. Prediction files are
``sample_id,<class1>,...,<classm>``; label files are ``sample_id,label``.
Floats are written as shortest round-trip decimals so a load/save cycle is
lossless.
"""
from __future__ import annotations

import csv
import difflib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import metrics
from .core import PROB_TOL, ClassSchema, CostMatrix, PredictionSet, check_decision_vector
from .core import renormalize as _renormalize
from .costmat import format_decimal

SPLITS = ("val", "test")


class ManifestError(ValueError):
    pass


class PredictionFileError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierEntry:
    id: str
    val: Path
    test: Path


@dataclass(frozen=True)
class PoolManifest:
    schema: ClassSchema
    classifiers: tuple
    labels: dict  # split -> Path
    root: Path

    @property
    def k(self) -> int:
        return len(self.classifiers)


def _open_write(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def load_manifest(path) -> PoolManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ManifestError(f"{path}: not valid JSON ({e})") from None
    for key in ("classes", "severity", "classifiers"):
        if key not in d:
            raise ManifestError(f"{path}: missing field {key!r}")
    try:
        schema = ClassSchema.from_severity(d["classes"], d["severity"])
    except ValueError as e:
        raise ManifestError(f"{path}: {e}") from None
    root = path.parent
    entries, seen = [], set()
    for i, c in enumerate(d["classifiers"]):
        for key in ("id", "val", "test"):
            if key not in c:
                raise ManifestError(f"{path}: classifier #{i} missing field {key!r}")
        if c["id"] in seen:
            raise ManifestError(f"{path}: duplicate classifier id {c['id']!r}")
        seen.add(c["id"])
        entries.append(ClassifierEntry(str(c["id"]), root / c["val"], root / c["test"]))
    if not entries:
        raise ManifestError(f"{path}: no classifiers listed")
    labels = {s: root / p for s, p in d.get("labels", {}).items()}
    return PoolManifest(schema, tuple(entries), labels, root)


def write_manifest(path, schema: ClassSchema, classifiers: Sequence[Mapping], labels: Mapping[str, str]) -> Path:
    d = {**schema.to_dict(), "labels": dict(labels), "classifiers": [dict(c) for c in classifiers]}
    with _open_write(path) as f:
        json.dump(d, f, indent=2)
        f.write("\n")
    return Path(path)


def load_predictions(path, schema: ClassSchema, tolerance: float = PROB_TOL, renormalize: bool = False):
    """Read one classifier's posteriors for one split.

    Returns ``(sample_ids, probs)`` with ``probs`` of shape (n, m), rows in
    file order. With ``renormalize`` rows that fail the sum check are
    rescaled instead of rejected (rows outside [0, 1] are still rejected).
    """
    path = Path(path)
    ids, rows = [], []
    seen = set()
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        expected = ["sample_id", *schema.class_names]
        if header != expected:
            raise PredictionFileError(f"{path}: header {header} does not match schema {expected}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(expected):
                raise PredictionFileError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(rec)}")
            sid = rec[0]
            if sid in seen:
                raise PredictionFileError(f"{path}:{lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)
            try:
                v = np.array([float(x) for x in rec[1:]])
            except ValueError as e:
                raise PredictionFileError(f"{path}:{lineno}: {e}") from None
            msg = check_decision_vector(v, tolerance)
            if msg is not None:
                if renormalize and np.all(np.isfinite(v)) and np.all(v >= 0) and v.sum() > 0:
                    v = _renormalize(v)
                    msg = check_decision_vector(v, tolerance)
                if msg is not None:
                    raise PredictionFileError(f"{path}:{lineno}: invalid decision vector: {msg}")
            ids.append(sid)
            rows.append(v)
    probs = np.array(rows, dtype=float).reshape(len(rows), schema.m)
    return tuple(ids), probs


def write_predictions(path, sample_ids: Sequence[str], probs, schema: ClassSchema) -> Path:
    probs = np.asarray(probs, dtype=float)
    with _open_write(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sample_id", *schema.class_names])
        for sid, row in zip(sample_ids, probs):
            w.writerow([sid, *(repr(float(x)) for x in row)])
    return Path(path)


def load_labels(path, schema: ClassSchema) -> dict:
    """Map sample id -> true class index."""
    path = Path(path)
    out = {}
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            warnings.warn(f"{path}: empty label file")
            return out
        if header != ["sample_id", "label"]:
            raise PredictionFileError(f"{path}: expected header sample_id,label, got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            sid, label = rec[0], rec[1]
            if label not in schema.class_names:
                hint = difflib.get_close_matches(label, schema.class_names, n=1)
                extra = f"; did you mean {hint[0]!r}?" if hint else ""
                raise PredictionFileError(f"{path}:{lineno}: unknown label {label!r}{extra}")
            if sid in out:
                raise PredictionFileError(f"{path}:{lineno}: duplicate sample_id {sid!r}")
            out[sid] = schema.index(label)
    if not out:
        warnings.warn(f"{path}: label file has no rows")
    return out


def write_labels(path, sample_ids: Sequence[str], labels, schema: ClassSchema) -> Path:
    with _open_write(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sample_id", "label"])
        for sid, y in zip(sample_ids, labels):
            w.writerow([sid, schema.class_names[int(y)]])
    return Path(path)


def _load_split(manifest: PoolManifest, split: str, tolerance: float, renormalize: bool,
                workers: Optional[int]) -> PredictionSet:
    schema = manifest.schema

    def one(entry):
        return load_predictions(getattr(entry, split), schema, tolerance, renormalize)

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            loaded = list(ex.map(one, manifest.classifiers))
    else:
        loaded = [one(e) for e in manifest.classifiers]
    ref_ids = loaded[0][0]
    for entry, (ids, _) in zip(manifest.classifiers, loaded):
        if ids != ref_ids:
            if set(ids) != set(ref_ids):
                raise PredictionFileError(
                    f"classifier {entry.id!r} covers a different {split} sample set than {manifest.classifiers[0].id!r}"
                )
            raise PredictionFileError(f"classifier {entry.id!r} lists {split} samples in a different order")
    labels = None
    if split in manifest.labels:
        lab = load_labels(manifest.labels[split], schema)
        missing = [s for s in ref_ids if s not in lab]
        if missing:
            raise PredictionFileError(f"{split} labels missing for {len(missing)} samples (e.g. {missing[0]!r})")
        labels = np.array([lab[s] for s in ref_ids], dtype=np.int64)
    probs = np.stack([p for _, p in loaded])
    return PredictionSet(schema, tuple(e.id for e in manifest.classifiers), ref_ids, probs, labels)


def load_pool(manifest, tolerance: float = PROB_TOL, renormalize: bool = False,
              workers: Optional[int] = None) -> tuple:
    """Load ``(val, test)`` prediction sets described by a manifest (path or PoolManifest)."""
    if not isinstance(manifest, PoolManifest):
        manifest = load_manifest(manifest)
    return tuple(_load_split(manifest, s, tolerance, renormalize, workers) for s in SPLITS)


def write_pool(out_dir, val: PredictionSet, test: PredictionSet) -> Path:
    """Write a manifest plus one CSV per classifier per split; returns the manifest path."""
    out_dir = Path(out_dir)
    schema = val.schema
    entries = []
    for i, cid in enumerate(val.classifier_ids):
        rel = {s: f"{s}/{cid}.csv" for s in SPLITS}
        write_predictions(out_dir / rel["val"], val.sample_ids, val.probs[i], schema)
        write_predictions(out_dir / rel["test"], test.sample_ids, test.probs[i], schema)
        entries.append({"id": cid, **rel})
    labels = {}
    for s, ps in zip(SPLITS, (val, test)):
        if ps.labels is not None:
            labels[s] = f"labels_{s}.csv"
            write_labels(out_dir / labels[s], ps.sample_ids, ps.labels, schema)
    return write_manifest(out_dir / "manifest.json", schema, entries, labels)


def write_cost_matrix(path, cost: CostMatrix) -> Path:
    with _open_write(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["", *cost.class_names])
        for name, row in zip(cost.class_names, cost.costs):
            w.writerow([name, *(format_decimal(x) for x in row)])
    return Path(path)


def read_cost_matrix(path, schema: Optional[ClassSchema] = None) -> CostMatrix:
    """Read a cost-matrix CSV; with a schema, rows/columns are checked against its class order."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    if not rows:
        raise ValueError(f"{path}: empty cost matrix file")
    names = rows[0][1:]
    if [r[0] for r in rows[1:]] != names:
        raise ValueError(f"{path}: row labels do not match column labels")
    if schema is not None and tuple(names) != schema.class_names:
        raise ValueError(f"{path}: classes {names} do not match schema {list(schema.class_names)}")
    try:
        costs = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from None
    return CostMatrix(costs, tuple(names))


def evaluation_report(engines: Mapping, test: PredictionSet,
                      cost_matrices: Optional[Mapping[str, CostMatrix]] = None) -> dict:
    """Per-method accuracy, costs, confusion matrix, per-class rates and weight audit."""
    cost_matrices = dict(cost_matrices or {})
    truth = test.require_labels()
    out = {"classes": list(test.schema.class_names), "n_test": test.n, "k": test.k, "methods": {}}
    for label, engine in engines.items():
        cm = metrics.confusion_matrix(engine.predict(test.probs), truth, test.m)
        rates = metrics.per_class_rates(cm)
        entry = {
            "accuracy": metrics.accuracy(cm),
            "total_cost": {c: metrics.total_cost(cm, cost_matrices[c]) for c in cost_matrices},
            "confusion": cm.tolist(),
            "per_class": [{"class": n, **r} for n, r in zip(test.schema.class_names, rates)],
        }
        if engine.report is not None:
            entry["objective_weights"] = engine.report.to_dict(test.classifier_ids)
        out["methods"][label] = entry
    return out


def per_class_table(report: Mapping) -> list:
    """Flatten an evaluation report into one row per (method, class)."""
    rows = []
    for label, entry in report["methods"].items():
        for r in entry["per_class"]:
            rows.append({"method": label, **r})
    return rows


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_report(report, path, format: str = "json") -> Path:
    """Write a report dict as JSON, or a list of flat dict rows as CSV."""
    if format == "json":
        with _open_write(path) as f:
            json.dump(report, f, indent=2)
            f.write("\n")
    elif format == "csv":
        rows = list(report)
        fields = list(rows[0]) if rows else []
        for r in rows:
            fields.extend(k for k in r if k not in fields)
        with _open_write(path) as f:
            w = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _csv_cell(v) for k, v in r.items()})
    else:
        raise ValueError(f"unknown report format {format!r}")
    return Path(path)


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def write_fused_predictions(path, sample_ids: Sequence[str], predictions, scores, schema: ClassSchema) -> Path:
    """Per-sample fused decision plus the (unnormalized) fused score per class."""
    with _open_write(path) as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["sample_id", "predicted", *(f"score_{c}" for c in schema.class_names)])
        for sid, p, s in zip(sample_ids, predictions, scores):
            w.writerow([sid, schema.class_names[int(p)], *(repr(float(x)) for x in s)])
    return Path(path)

