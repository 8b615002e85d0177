"""
Building cost matrices from a severity ranking
==============================================

Correct predictions of severe classes are cheap, and mistaking a severe
class for a benign one is expensive. Two presets come from the same
procedure: one with the clinical ranking (A) and one with it reversed (B).
"""
import numpy as np

from costfusion import ClassSchema, CostMatrixSpec, build_cost_matrix, cost_matrix_a, cost_matrix_b
from costfusion.costmat import diagonal_costs, raw_offdiagonal

schema = ClassSchema.isic()
print("classes (matrix order):", schema.class_names)
print("severity (most -> least):", schema.severity_order)

# Step 1: correct-prediction costs follow the severity rank, 1 for MEL ... 8 for BKL.
spec = CostMatrixSpec(schema)
diag = diagonal_costs(spec)
print(dict(zip(schema.class_names, diag.tolist())))

# Step 2: an error from class i to class j costs (c_jj / c_ii) ** 2 before scaling.
mel, bkl = schema.index("MEL"), schema.index("BKL")
print("raw MEL -> BKL:", raw_offdiagonal(diag[mel], diag[bkl]))
print("raw BKL -> MEL:", raw_offdiagonal(diag[bkl], diag[mel]))

# Step 3: off-diagonals are min-max scaled into [16, 200] and rounded.
A = cost_matrix_a(schema)
B = cost_matrix_b(schema)
np.set_printoptions(linewidth=120)
print("Cost matrix A\n", A.costs.astype(int))
print("Cost matrix B\n", B.costs.astype(int))

# Any taxonomy works; here three classes with a custom scale.
tiny = ClassSchema.from_severity(["benign", "atypical", "malignant"], ["malignant", "atypical", "benign"])
print(build_cost_matrix(CostMatrixSpec(tiny, offdiag_scale_min=5, offdiag_scale_max=50)).costs)
