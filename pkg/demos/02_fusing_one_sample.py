"""
Fusing the posteriors of one sample
===================================

Objective weights come from validation confusion matrices (optionally
cost-adjusted); subjective weights come from how peaked each classifier's
posterior is on the sample at hand. The final weight averages the two.
"""
import numpy as np

from costfusion import (
    ClassSchema,
    cost_matrix_a,
    fuse_active,
    fuse_average,
    fuse_max_voting,
    individuality,
    objective_weights,
    subjective_weights,
    uniform_cost_matrix,
)

schema = ClassSchema.isic()
mel, bkl = schema.index("MEL"), schema.index("BKL")

# Two classifiers with the same validation accuracy. The first sends melanomas
# to benign keratosis; the second makes the opposite, cheaper mistake.
base = np.diag(np.full(8, 50.0))
careless, careful = base.copy(), base.copy()
careless[mel, bkl] = 10
careful[bkl, mel] = 10

flat = objective_weights([careless, careful], uniform_cost_matrix(8))
costed = objective_weights([careless, careful], cost_matrix_a(schema))
print("objective weights, uniform cost:", flat.weights)
print("objective weights, cost matrix A:", costed.weights)

# A test sample: the careless classifier is unsure, the careful one is confident.
P = np.array([
    [0.30, 0.05, 0.05, 0.05, 0.35, 0.05, 0.10, 0.05],
    [0.80, 0.02, 0.03, 0.03, 0.05, 0.02, 0.03, 0.02],
])
print("individuality:", [round(individuality(p), 4) for p in P])
print("subjective weights:", subjective_weights(P))

for name, d in [("max voting", fuse_max_voting(P)), ("average", fuse_average(P)),
                ("AF", fuse_active(P, flat.weights)), ("CS-AF(A)", fuse_active(P, costed.weights))]:
    print(f"{name:>10}: {schema.class_names[d.predicted_class]}  scores={np.round(d.fused_scores, 3)}")
