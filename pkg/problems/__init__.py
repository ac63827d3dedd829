"""
Problems module: worker-local objectives with stochastic gradient oracles
and the analytic quantities (L, infima, heterogeneity gap) used by the
theory module.
"""

from problems.objective import Objective
from problems.quadratic import QuadraticProblem, make_heterogeneous_quadratics
from problems.classification import ClassificationObjective, one_hot
from problems.logistic import LogisticProblem
from problems.mlp import MlpProblem
from problems.aggregate import (
    delta_inf,
    global_gradient,
    global_infimum,
    global_smoothness,
    global_value,
    quadratic_global_minimizer,
)
from problems.estimation import (
    estimate_global_infimum,
    estimate_noise_bound,
    estimate_smoothness,
    finite_difference_gradient,
)

__all__ = [
    "Objective",
    "QuadraticProblem",
    "make_heterogeneous_quadratics",
    "ClassificationObjective",
    "one_hot",
    "LogisticProblem",
    "MlpProblem",
    "delta_inf",
    "global_gradient",
    "global_infimum",
    "global_smoothness",
    "global_value",
    "quadratic_global_minimizer",
    "estimate_global_infimum",
    "estimate_noise_bound",
    "estimate_smoothness",
    "finite_difference_gradient",
]
