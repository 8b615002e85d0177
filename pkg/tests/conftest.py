import numpy as np
import pytest

from costfusion import ClassSchema, SyntheticPoolSpec, generate_pool


@pytest.fixture(scope="session")
def isic():
    return ClassSchema.isic()


@pytest.fixture(scope="session")
def small_pool(isic):
    return generate_pool(SyntheticPoolSpec(seed=7, k=6, schema=isic, n_val=200, n_test=300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_simplex(rng, m, size=None):
    """Random decision vectors with the occasional exact tie or zero entry."""
    g = rng.random((size or 1, m))
    g[rng.random(g.shape) < 0.1] = 0.0
    g[:, 0] += 1e-3
    v = g / g.sum(axis=1, keepdims=True)
    return v if size else v[0]


_CRITERIA = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; returns ``ok`` so callers can assert on it."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
