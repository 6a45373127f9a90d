"""Post-process an edge-weight predictor into a multicalibrated one so that an
exact solver on its output competes with a family of decision rules run on
the original predictions."""

from calibmatch._backend import BACKEND
from calibmatch.calibrator import (
    CalibrationParams,
    CalibrationTrace,
    Violation,
    audit,
    check_empirical,
    check_exact,
    hoeffding_sample_size,
    iteration_bound,
    plan_sample_budget,
    project_box,
    weighted_mc,
)
from calibmatch.combinatorial import (
    DecisionRule,
    Matroid,
    Problem,
    apply_rule,
    exact_max_weight_matching,
    greedy_matching,
    matroid_greedy_base,
    star_graph_embed,
)
from calibmatch.errors import (
    CalibMatchError,
    CapacityError,
    ConfigurationError,
    ConvergenceError,
    InputError,
)
from calibmatch.harness import ExperimentConfig, Report, emit_report, run_experiment, sweep
from calibmatch.model import (
    FiniteDistribution,
    TabularPredictor,
    bayes_predictor,
    mse_potential,
    rule_value,
    sample,
)
from calibmatch.scenarios import (
    Scenario,
    make_counterexample,
    make_matroid_instance,
    make_random_matching_instance,
    make_rejection_instance,
)
from calibmatch.weights import build_weight_class, eval_weight

__version__ = "0.1.0"
