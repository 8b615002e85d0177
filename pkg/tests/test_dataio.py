import json

import numpy as np
import pytest

from costfusion import dataio, metrics
from costfusion.costmat import cost_matrix_a
from costfusion.fusion import FusionEngine


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


HEADER = "sample_id,MEL,NV,BCC,AK,BKL,DF,VASC,SCC\n"


def test_predictions_round_trip(tmp_path, small_pool, isic):
    t = small_pool.test
    path = dataio.write_predictions(tmp_path / "p.csv", t.sample_ids, t.probs[0], isic)
    ids, probs = dataio.load_predictions(path, isic)
    assert ids == t.sample_ids
    np.testing.assert_array_equal(probs, t.probs[0])
    again = dataio.write_predictions(tmp_path / "q.csv", ids, probs, isic)
    assert again.read_bytes() == path.read_bytes()


def test_three_rows(tmp_path, isic):
    p = _write(tmp_path / "p.csv", HEADER + "a,1,0,0,0,0,0,0,0\nb,0.125,0.125,0.125,0.125,0.125,0.125,0.125,0.125\n"
               "c,0.5,0.5,0,0,0,0,0,0\n")
    ids, probs = dataio.load_predictions(p, isic)
    assert ids == ("a", "b", "c") and probs.shape == (3, 8)


def test_bad_row_reports_line(tmp_path, isic):
    p = _write(tmp_path / "p.csv", HEADER + "a,1,0,0,0,0,0,0,0\nb,0.6,0.6,0,0,0,0,0,0\n")
    with pytest.raises(dataio.PredictionFileError, match=r"p\.csv:3"):
        dataio.load_predictions(p, isic)
    _, probs = dataio.load_predictions(p, isic, renormalize=True)
    np.testing.assert_array_equal(probs[1], [0.5, 0.5, 0, 0, 0, 0, 0, 0])


def test_within_tolerance_unchanged(tmp_path, isic):
    p = _write(tmp_path / "p.csv", HEADER + "a,0.5000004,0.5,0,0,0,0,0,0\n")
    _, probs = dataio.load_predictions(p, isic, renormalize=True)
    assert probs[0, 0] == 0.5000004


def test_header_mismatch(tmp_path, isic):
    p = _write(tmp_path / "p.csv", "sample_id,NV,MEL,BCC,AK,BKL,DF,VASC,SCC\n")
    with pytest.raises(dataio.PredictionFileError, match="header"):
        dataio.load_predictions(p, isic)


def test_duplicate_sample(tmp_path, isic):
    p = _write(tmp_path / "p.csv", HEADER + "a,1,0,0,0,0,0,0,0\na,1,0,0,0,0,0,0,0\n")
    with pytest.raises(dataio.PredictionFileError, match="duplicate"):
        dataio.load_predictions(p, isic)


def test_labels(tmp_path, isic):
    p = _write(tmp_path / "l.csv", "sample_id,label\na,MEL\nb,BKL\n")
    assert dataio.load_labels(p, isic) == {"a": 0, "b": isic.index("BKL")}
    bad = _write(tmp_path / "m.csv", "sample_id,label\na,MELL\n")
    with pytest.raises(dataio.PredictionFileError, match="did you mean 'MEL'"):
        dataio.load_labels(bad, isic)
    dup = _write(tmp_path / "d.csv", "sample_id,label\na,MEL\na,NV\n")
    with pytest.raises(dataio.PredictionFileError, match="duplicate"):
        dataio.load_labels(dup, isic)
    empty = _write(tmp_path / "e.csv", "")
    with pytest.warns(UserWarning):
        assert dataio.load_labels(empty, isic) == {}


def _manifest(tmp_path, **overrides):
    d = {"classes": ["A", "B"], "severity": ["B", "A"],
         "classifiers": [{"id": "x", "val": "x_val.csv", "test": "x_test.csv"},
                         {"id": "y", "val": "y_val.csv", "test": "y_test.csv"}]}
    d.update(overrides)
    return _write(tmp_path / "manifest.json", json.dumps(d))


def test_manifest_minimal(tmp_path):
    m = dataio.load_manifest(_manifest(tmp_path))
    assert m.k == 2
    assert m.schema.severity_order == ("B", "A")
    assert m.classifiers[0].val == tmp_path / "x_val.csv"


def test_manifest_duplicate_id(tmp_path):
    dup = [{"id": "x", "val": "a", "test": "b"}, {"id": "x", "val": "c", "test": "d"}]
    with pytest.raises(dataio.ManifestError, match="duplicate classifier id 'x'"):
        dataio.load_manifest(_manifest(tmp_path, classifiers=dup))


def test_manifest_bad_severity(tmp_path):
    with pytest.raises(dataio.ManifestError):
        dataio.load_manifest(_manifest(tmp_path, severity=["A", "C"]))
    with pytest.raises(dataio.ManifestError, match="missing field 'severity'"):
        d = json.loads(_manifest(tmp_path).read_text())
        del d["severity"]
        dataio.load_manifest(_write(tmp_path / "manifest.json", json.dumps(d)))


def test_pool_round_trip(tmp_path, small_pool):
    path = dataio.write_pool(tmp_path / "pool", small_pool.val, small_pool.test)
    val, test = dataio.load_pool(path)
    for a, b in ((val, small_pool.val), (test, small_pool.test)):
        assert a.classifier_ids == b.classifier_ids
        assert a.sample_ids == b.sample_ids
        np.testing.assert_array_equal(a.labels, b.labels)
        assert np.max(np.abs(a.probs - b.probs)) <= 1e-12
        assert np.all(np.abs(a.probs.sum(-1) - 1) <= 1e-6)


def test_pool_sample_mismatch(tmp_path, small_pool):
    path = dataio.write_pool(tmp_path / "pool", small_pool.val, small_pool.test)
    f = tmp_path / "pool" / "test" / f"{small_pool.test.classifier_ids[1]}.csv"
    lines = f.read_text().splitlines(keepends=True)
    f.write_text("".join(lines[:-1]))
    with pytest.raises(dataio.PredictionFileError, match="different test sample set"):
        dataio.load_pool(path)
    f.write_text("".join([lines[0], lines[2], lines[1], *lines[3:]]))
    with pytest.raises(dataio.PredictionFileError, match="different order"):
        dataio.load_pool(path)


def test_cost_matrix_csv(tmp_path, isic):
    a = cost_matrix_a(isic)
    p = dataio.write_cost_matrix(tmp_path / "a.csv", a)
    assert dataio.read_cost_matrix(p, isic) == a
    assert p.read_text().splitlines()[0] == ",MEL,NV,BCC,AK,BKL,DF,VASC,SCC"


def test_evaluation_report(tmp_path, small_pool, isic):
    a = cost_matrix_a(isic)
    engines = {"average": FusionEngine.fit("average", small_pool.val),
               "cs_af": FusionEngine.fit("cs_af", small_pool.val, a)}
    rep = dataio.evaluation_report(engines, small_pool.test, {"A": a})
    path = dataio.write_report(rep, tmp_path / "r.json")
    assert dataio.read_report(path) == rep
    for label, entry in rep["methods"].items():
        cm = np.array(entry["confusion"])
        assert entry["accuracy"] == metrics.accuracy(cm)
        assert entry["total_cost"]["A"] == metrics.total_cost(cm, a)
        assert len(entry["per_class"]) == 8
    assert len(rep["methods"]["cs_af"]["objective_weights"]["classifiers"]) == small_pool.val.k
    table = dataio.per_class_table(rep)
    assert len([r for r in table if r["method"] == "average"]) == 8
    csv_path = dataio.write_report(table, tmp_path / "r.csv", "csv")
    assert len(csv_path.read_text().splitlines()) == 1 + 16


def test_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        dataio.write_report({}, blocker / "r.json")
