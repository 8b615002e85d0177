"""
How the cost matrix shifts per-class behaviour
==============================================

Half of the pool systematically mistakes the three most severe classes for
benign ones. Cost matrix A punishes exactly those errors, so CS-AF(A) leans
on the other half and recovers severe-class sensitivity; cost matrix B
barely notices them.
"""
from costfusion import ClassSchema, FusionEngine, SyntheticPoolSpec, cost_matrix_a, cost_matrix_b, generate_pool
from costfusion import severe_to_benign_bias
from costfusion.harness import per_class_report

schema = ClassSchema.isic()
bias = severe_to_benign_bias(schema, classifiers=range(0, 16, 2), probability=0.3)
pool = generate_pool(SyntheticPoolSpec(seed=43, k=16, schema=schema, confusion_bias=bias))
sub = pool.test.subset(range(6))  # a small ensemble keeps the differences visible

A, B = cost_matrix_a(schema), cost_matrix_b(schema)
engines = {
    "cs_af(A)": FusionEngine.fit("cs_af", pool.val.subset(range(6)), A),
    "cs_af(B)": FusionEngine.fit("cs_af", pool.val.subset(range(6)), B),
}
report = per_class_report(engines, sub, {"A": A, "B": B})

print(f"{'class':>5} " + " ".join(f"{m + ' sens':>14} {m + ' spec':>14}" for m in engines))
for name in schema.severity_order:
    i = schema.index(name)
    cells = []
    for m in engines:
        r = report[m]["per_class"][i]
        cells += [f"{r['sensitivity']:14.4f}", f"{r['specificity']:14.4f}"]
    print(f"{name:>5} " + " ".join(cells))
for m in engines:
    print(m, {k: round(v) for k, v in report[m]["total_cost"].items()})
