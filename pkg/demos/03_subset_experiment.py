"""
Random-subset experiment on a synthetic pool
============================================

A pool of 48 synthetic classifiers stands in for trained networks. For each
subset size N we draw 100 random subsets, fuse the test split with every
method on the same subset, and average accuracy and total cost.
"""
from pathlib import Path

from costfusion import ClassSchema, SyntheticPoolSpec, cost_matrix_a, cost_matrix_b, generate_pool
from costfusion import dataio
from costfusion.harness import run_subset_experiment, standard_methods

schema = ClassSchema.isic()
pool = generate_pool(SyntheticPoolSpec(seed=42, k=48, schema=schema))
costs = {"A": cost_matrix_a(schema), "B": cost_matrix_b(schema)}

report = run_subset_experiment(pool.val, pool.test, standard_methods(costs), n_list=(4, 8, 16, 32),
                               repetitions=100, seed=42, cost_matrices=costs)

print(f"{'method':>10} {'N':>3} {'accuracy':>9} {'cost A':>9} {'cost B':>9}")
for row in report.summary():
    print(f"{row['method']:>10} {row['N']:>3} {row['accuracy_mean']:9.4f} "
          f"{row['cost_A_mean']:9.0f} {row['cost_B_mean']:9.0f}")

# The flat table is ready for any plotting tool.
out = dataio.write_report(report.curve_rows(), Path("subset_curves.csv"), "csv")
print("wrote", out)
