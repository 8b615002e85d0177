import json

import numpy as np
import pytest

from costfusion import dataio
from costfusion.cli import main
from costfusion.fusion import fuse_average

FIXTURES = __import__("pathlib").Path(__file__).resolve().parents[1] / "src" / "costfusion" / "data"


@pytest.fixture(scope="module")
def pool_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pool")
    assert main(["synth", "--seed", "3", "--k", "6", "--n-val", "150", "--n-test", "200",
                 "--bias", "0-2:MEL>BKL:0.3", "--out-dir", str(out)]) == 0
    return out


def test_costmat_fixtures(tmp_path):
    assert main(["costmat", "build", "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["costmat", "build", "--reverse", "--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (FIXTURES / "cost_matrix_a.csv").read_bytes()
    assert (tmp_path / "b.csv").read_bytes() == (FIXTURES / "cost_matrix_b.csv").read_bytes()


def test_costmat_bad_severity(tmp_path, capsys):
    assert main(["costmat", "build", "--severity", "MEL,SCC", "--out", str(tmp_path / "x.csv")]) != 0
    assert "severity" in capsys.readouterr().err


def test_synth_same_seed(tmp_path, pool_dir):
    other = tmp_path / "again"
    main(["synth", "--seed", "3", "--k", "6", "--n-val", "150", "--n-test", "200",
          "--bias", "0-2:MEL>BKL:0.3", "--out-dir", str(other)])
    files = sorted(p.relative_to(pool_dir) for p in pool_dir.rglob("*") if p.is_file())
    assert files == sorted(p.relative_to(other) for p in other.rglob("*") if p.is_file())
    for f in files:
        assert (pool_dir / f).read_bytes() == (other / f).read_bytes()


def test_fuse_average_matches_library(tmp_path, pool_dir, recwarn):
    out = tmp_path / "avg"
    assert main(["fuse", "--manifest", str(pool_dir / "manifest.json"), "--method", "average", "--out", str(out)]) == 0
    assert len(recwarn) == 0
    _, test = dataio.load_pool(pool_dir / "manifest.json")
    lines = (out / "predictions.csv").read_text().splitlines()[1:]
    for j, line in enumerate(lines):
        assert line.split(",")[1] == test.schema.class_names[fuse_average(test.decision_matrix(j)).predicted_class]
    report = json.loads((out / "report.json").read_text())
    assert "average" in report["methods"]


def test_fuse_uniform_cs_af_equals_af(tmp_path, pool_dir):
    from costfusion.costmat import uniform_cost_matrix
    from costfusion.core import ISIC_CLASSES

    uni = dataio.write_cost_matrix(tmp_path / "uniform.csv", uniform_cost_matrix(8, ISIC_CLASSES))
    m = str(pool_dir / "manifest.json")
    assert main(["fuse", "--manifest", m, "--method", "af", "--out", str(tmp_path / "af")]) == 0
    assert main(["fuse", "--manifest", m, "--method", "cs-af", "--cost-matrix", str(uni),
                 "--out", str(tmp_path / "cs")]) == 0
    assert (tmp_path / "af" / "predictions.csv").read_bytes() == (tmp_path / "cs" / "predictions.csv").read_bytes()


def test_fuse_flag_rules(tmp_path, pool_dir, capsys):
    m = str(pool_dir / "manifest.json")
    assert main(["fuse", "--manifest", m, "--method", "cs-af", "--out", str(tmp_path)]) == 1
    assert main(["fuse", "--manifest", m, "--method", "af", "--cost-matrix", str(FIXTURES / "cost_matrix_a.csv"),
                 "--out", str(tmp_path)]) == 1
    assert "cost-matrix" in capsys.readouterr().err


def test_fuse_csv_report(tmp_path, pool_dir):
    m = str(pool_dir / "manifest.json")
    assert main(["fuse", "--manifest", m, "--method", "cs-af", "--cost-matrix", str(FIXTURES / "cost_matrix_a.csv"),
                 "--format", "csv", "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "report.csv").read_text().splitlines()) == 9


def test_experiment(tmp_path, pool_dir):
    args = ["experiment", "--manifest", str(pool_dir / "manifest.json"), "--N", "2,6", "--reps", "1", "--seed", "7",
            "--cost-matrix", f"{FIXTURES / 'cost_matrix_a.csv'},{FIXTURES / 'cost_matrix_b.csv'}"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b"), "--threads", "3"]) == 0
    for name in ("curves.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "curves.csv").read_text().splitlines()
    assert len(rows) - 1 == 5 * 2
    header = rows[0].split(",")
    full = [dict(zip(header, r.split(","))) for r in rows[1:] if r.split(",")[1] == "6"]
    assert all(float(r["accuracy_std"]) == 0 for r in full)


def test_experiment_unknown_method(tmp_path, pool_dir, capsys):
    assert main(["experiment", "--manifest", str(pool_dir / "manifest.json"), "--methods", "median",
                 "--out-dir", str(tmp_path)]) == 1
    assert "unknown method" in capsys.readouterr().err
