"""Cost-sensitive active fusion of classifier posteriors."""
from .core import (
    ISIC_CLASSES,
    ISIC_SEVERITY,
    ClassSchema,
    CostMatrix,
    InvalidDecisionVector,
    PredictionSet,
    check_decision_vector,
    renormalize,
    validate_decision_vector,
)
from .costmat import (
    CostMatrixSpec,
    build_cost_matrix,
    cost_matrix_a,
    cost_matrix_b,
    uniform_cost_matrix,
)
from .fusion import (
    FusedDecision,
    FusionEngine,
    fuse_active,
    fuse_average,
    fuse_max_voting,
    fuse_weighted,
    predict_batch,
)
from .harness import Method, per_class_report, run_subset_experiment, standard_methods
from .synth import SyntheticPoolSpec, generate_pool, severe_to_benign_bias
from .weights import combine_weights, individuality, objective_weights, subjective_weights

__version__ = "0.1.0"
