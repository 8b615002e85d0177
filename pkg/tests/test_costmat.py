import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from costfusion import dataio
from costfusion.core import ClassSchema
from costfusion.costmat import (
    CostMatrixSpec,
    build_cost_matrix,
    cost_matrix_a,
    cost_matrix_b,
    diagonal_costs,
    format_decimal,
    raw_offdiagonal,
    scale_offdiagonals,
    uniform_cost_matrix,
)
from costfusion import metrics
from costfusion.weights import objective_weights

FIXTURES = __import__("pathlib").Path(__file__).resolve().parents[1] / "src" / "costfusion" / "data"


def test_diagonal_anchor_values(isic):
    d = diagonal_costs(CostMatrixSpec(isic))
    assert d[isic.index("MEL")] == 1
    assert d[isic.index("BKL")] == 8


def test_diagonal_two_classes():
    s = ClassSchema(("a", "b"), (0, 1))
    np.testing.assert_array_equal(diagonal_costs(CostMatrixSpec(s, offdiag_scale_min=2, offdiag_scale_max=3)), [1, 2])


def test_raw_offdiagonal():
    assert raw_offdiagonal(1, 8) == 64
    assert raw_offdiagonal(8, 1) == 0.015625
    assert raw_offdiagonal(3, 3) == 1
    with pytest.raises(ValueError):
        raw_offdiagonal(0, 2)


def test_scale_endpoints_and_hand_value(isic):
    d = diagonal_costs(CostMatrixSpec(isic))
    raw = np.array([[d[i] if i == j else raw_offdiagonal(d[i], d[j]) for j in range(8)] for i in range(8)])
    scaled = scale_offdiagonals(raw, 16, 200, round=False)
    off = ~np.eye(8, dtype=bool)
    assert scaled[off].min() == 16
    assert scaled[off].max() == 200
    scc, mel = isic.index("SCC"), isic.index("MEL")
    assert raw[scc, mel] == 0.25
    hand = 16 + (0.25 - 1 / 64) / (64 - 1 / 64) * 184
    assert scaled[scc, mel] == pytest.approx(hand, abs=1e-12)
    assert hand == pytest.approx(16.674, abs=1e-3)
    assert build_cost_matrix(CostMatrixSpec(isic)).costs[scc, mel] == 17


def test_scale_degenerate_warns():
    raw = np.array([[1.0, 5.0], [5.0, 2.0]])
    with pytest.warns(UserWarning, match="degenerate"):
        out = scale_offdiagonals(raw, 16, 200)
    np.testing.assert_array_equal(out, [[1, 16], [16, 2]])


def test_round_half_away():
    raw = np.array([[1.0, 0.0, 1.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    # lo=0, hi=1 over values {0, 0.5, 1}: 0.5 must round up.
    out = scale_offdiagonals(raw, 0.0, 1.0, round=True)
    assert out[1, 0] == 1.0


def test_two_class_build():
    s = ClassSchema(("a", "b"), (0, 1))
    cm = build_cost_matrix(CostMatrixSpec(s))
    np.testing.assert_array_equal(cm.costs, [[1, 200], [16, 2]])


def test_spec_rejects_low_scale(isic):
    with pytest.raises(ValueError, match="below the largest diagonal"):
        CostMatrixSpec(isic, offdiag_scale_min=4)


def test_matrix_a_properties(isic):
    a = cost_matrix_a(isic)
    c = a.costs
    assert np.all(c > 0)
    assert np.all(c >= np.diag(c)[:, None])
    assert np.array_equal(c, np.round(c))
    assert c[isic.index("MEL"), isic.index("BKL")] == 200


def test_b_mirrors_a(isic):
    a, b = cost_matrix_a(isic).costs, cost_matrix_b(isic).costs
    # class with rank r in A plays the role of the class with rank m-1-r in B
    sigma = [isic.class_with_rank(7 - isic.severity_rank[i]) for i in range(8)]
    np.testing.assert_array_equal(b, a[np.ix_(sigma, sigma)])


def test_fixtures_byte_stable(tmp_path, isic):
    for name, cm in (("cost_matrix_a.csv", cost_matrix_a(isic)), ("cost_matrix_b.csv", cost_matrix_b(isic))):
        out = dataio.write_cost_matrix(tmp_path / name, cm)
        assert out.read_bytes() == (FIXTURES / name).read_bytes()
        assert dataio.read_cost_matrix(FIXTURES / name, isic) == cm


def test_uniform(isic):
    u = uniform_cost_matrix(8)
    np.testing.assert_array_equal(u.costs, np.ones((8, 8)))
    cm = np.arange(64.0).reshape(8, 8)
    np.testing.assert_array_equal(metrics.cost_adjust(cm, u), cm)
    cms = [np.diag([5.0] * 8) + 1, np.eye(8) * 3 + np.ones((8, 8))]
    np.testing.assert_array_equal(
        objective_weights(cms, u).weights, [metrics.accuracy(c) for c in cms]
    )


@given(st.lists(st.floats(0.01, 100), min_size=3, max_size=30, unique=True))
def test_scaling_monotone(vals):
    m = 2
    while m * (m - 1) < len(vals):
        m += 1
    raw = np.ones((m, m))
    off = np.argwhere(~np.eye(m, dtype=bool))
    fill = (vals * ((len(off) // len(vals)) + 1))[: len(off)]
    for (i, j), v in zip(off, fill):
        raw[i, j] = v
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = scale_offdiagonals(raw, 16, 200)
    order = np.argsort(raw[~np.eye(m, dtype=bool)], kind="stable")
    assert np.all(np.diff(out[~np.eye(m, dtype=bool)][order]) >= 0)


@given(st.permutations(range(6)))
def test_principle_four_any_ranking(perm):
    s = ClassSchema(tuple("abcdef"), tuple(perm))
    c = build_cost_matrix(CostMatrixSpec(s)).costs
    assert np.all(c >= np.diag(c)[:, None])
    assert np.all(c > 0)


def test_format_decimal():
    assert format_decimal(16.0) == "16"
    assert format_decimal(0.1) == "0.1"
    assert float(format_decimal(1 / 3)) == 1 / 3
