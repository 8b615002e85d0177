"""Cost-matrix construction from a severity ranking.

Correct predictions cost less for more severe classes; an error from class i
to class j costs ``(c_jj / c_ii) ** 2`` before the off-diagonal block is
min-max scaled into ``[lo, hi]`` and rounded to integers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ClassSchema, CostMatrix

DEFAULT_LO = 16.0
DEFAULT_HI = 200.0


@dataclass(frozen=True)
class CostMatrixSpec:
    schema: ClassSchema
    diagonal_base: Optional[tuple] = None  # indexed by severity rank; default rank + 1
    offdiag_scale_min: float = DEFAULT_LO
    offdiag_scale_max: float = DEFAULT_HI
    round_offdiag: bool = True

    def __post_init__(self):
        base = self.diagonal_base
        if base is None:
            base = tuple(float(r + 1) for r in range(self.schema.m))
        base = tuple(float(b) for b in base)
        object.__setattr__(self, "diagonal_base", base)
        if len(base) != self.schema.m:
            raise ValueError(f"diagonal_base has {len(base)} entries for {self.schema.m} classes")
        if min(base) <= 0:
            raise ValueError("diagonal_base must be strictly positive")
        if not self.offdiag_scale_min < self.offdiag_scale_max:
            raise ValueError("offdiag_scale_min must be below offdiag_scale_max")
        if self.offdiag_scale_min < max(base):
            raise ValueError(
                f"offdiag_scale_min={self.offdiag_scale_min} is below the largest diagonal cost "
                f"{max(base)}; errors could cost less than correct predictions"
            )


def diagonal_costs(spec: CostMatrixSpec) -> np.ndarray:
    """Correct-prediction cost per class (class order), looked up by severity rank."""
    return np.array([spec.diagonal_base[r] for r in spec.schema.severity_rank], dtype=float)


def raw_offdiagonal(c_ii: float, c_jj: float) -> float:
    """Unscaled cost of predicting class i as class j."""
    if c_ii <= 0 or c_jj <= 0:
        raise ValueError(f"diagonal costs must be positive, got {c_ii}, {c_jj}")
    return (c_jj / c_ii) ** 2


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def scale_offdiagonals(raw, lo: float = DEFAULT_LO, hi: float = DEFAULT_HI, round: bool = True) -> np.ndarray:
    """Min-max scale the off-diagonal cells of ``raw`` into [lo, hi].

    The diagonal is copied through untouched. When every off-diagonal value is
    equal the scaling is degenerate: all of them map to ``lo`` with a warning.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {raw.shape}")
    if not lo < hi:
        raise ValueError("lo must be below hi")
    off = ~np.eye(raw.shape[0], dtype=bool)
    vals = raw[off]
    vmin, vmax = vals.min(), vals.max()
    out = raw.copy()
    if vmax == vmin:
        warnings.warn("all off-diagonal costs are equal; min-max scaling is degenerate, mapping to lo")
        scaled = np.full_like(vals, lo)
    else:
        scaled = lo + (vals - vmin) / (vmax - vmin) * (hi - lo)
    if round:
        scaled = round_half_away(scaled)
    out[off] = scaled
    return out


def build_cost_matrix(spec: CostMatrixSpec) -> CostMatrix:
    diag = diagonal_costs(spec)
    m = len(diag)
    raw = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            raw[i, j] = diag[i] if i == j else raw_offdiagonal(diag[i], diag[j])
    costs = scale_offdiagonals(raw, spec.offdiag_scale_min, spec.offdiag_scale_max, spec.round_offdiag)
    return CostMatrix(costs, spec.schema.class_names)


def uniform_cost_matrix(m: int, class_names: Sequence[str] = ()) -> CostMatrix:
    """All-ones costs; cost adjustment with it is the identity."""
    if m < 2:
        raise ValueError("need m >= 2")
    return CostMatrix(np.ones((m, m)), tuple(class_names))


def cost_matrix_a(schema: Optional[ClassSchema] = None, **kwargs) -> CostMatrix:
    """Preset emphasizing the most severe classes (the schema's own ranking)."""
    schema = schema or ClassSchema.isic()
    return build_cost_matrix(CostMatrixSpec(schema, **kwargs))


def cost_matrix_b(schema: Optional[ClassSchema] = None, **kwargs) -> CostMatrix:
    """Preset built from the exact reverse severity ranking."""
    schema = schema or ClassSchema.isic()
    return build_cost_matrix(CostMatrixSpec(schema.reversed(), **kwargs))


def format_decimal(x: float) -> str:
    """Shortest round-trip decimal, without a trailing '.0' on integers."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = repr(x)
    return s[:-2] if s.endswith(".0") else s
