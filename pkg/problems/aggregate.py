"""
Quantities of the average objective f = (1/n) sum_i f_i.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from numerics.exceptions import ConfigurationError
from numerics.vectors import mean_reduce
from problems.objective import Objective
from problems.quadratic import QuadraticProblem

logger = logging.getLogger(__name__)

# Relative slack under which a negative heterogeneity gap is rounding noise.
_DELTA_ROUNDING = 1e-10


def global_value(objectives: Sequence[Objective], x: np.ndarray) -> float:
    """f(x), summed in ascending worker order."""
    total = 0.0
    for objective in objectives:
        total += objective.value(x)
    return total / len(objectives)


def global_gradient(objectives: Sequence[Objective], x: np.ndarray) -> np.ndarray:
    """grad f(x) = mean of the worker full gradients."""
    return mean_reduce([objective.full_gradient(x) for objective in objectives])


def global_smoothness(objectives: Sequence[Objective]) -> float:
    """Common smoothness constant L = max_i L_i."""
    return max(objective.smoothness for objective in objectives)


def quadratic_global_minimizer(objectives: Sequence[QuadraticProblem]) -> np.ndarray:
    """
    Minimizer of the average of quadratics.

    Solves (sum_i A_i) x = sum_i b_i; a least-squares solution is returned
    when the summed matrix is singular.

    Raises:
        TypeError: If any objective is not a ``QuadraticProblem``.
    """
    if not all(isinstance(o, QuadraticProblem) for o in objectives):
        raise TypeError("quadratic_global_minimizer needs QuadraticProblem workers")
    A = sum(o.A for o in objectives)
    b = sum(o.b for o in objectives)
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        logger.warning("Summed quadratic matrix is singular; using least squares")
        return np.linalg.lstsq(A, b, rcond=None)[0]


def global_infimum(objectives: Sequence[Objective]) -> float:
    """
    Analytic f^inf for quadratic workers.

    Raises:
        ConfigurationError: For non-quadratic objectives, whose infimum must be
            estimated (see ``estimate_global_infimum``).
    """
    if not all(isinstance(o, QuadraticProblem) for o in objectives):
        raise ConfigurationError(
            "f^inf is only analytic for quadratic workers; supply an estimate"
        )
    return global_value(objectives, quadratic_global_minimizer(objectives))


def delta_inf(objectives: Sequence[Objective], f_inf: Optional[float] = None) -> float:
    """
    Heterogeneity gap Delta^inf = f^inf - (1/n) sum_i f_i^inf.

    Args:
        objectives: Worker objectives.
        f_inf: Infimum (or a documented lower estimate) of the average
            objective; computed analytically for quadratics when omitted.

    Returns:
        The non-negative gap.

    Raises:
        ConfigurationError: If the inputs give a negative gap.

    Example:
        Two 1-D quadratics 1/2 (x - 1)^2 and 1/2 (x + 1)^2 average to
        1/2 x^2 + 1/2, so f^inf = 1/2, both f_i^inf = 0 and the gap is 1/2.
    """
    if len(objectives) == 0:
        raise ConfigurationError("delta_inf needs at least one objective")
    if f_inf is None:
        f_inf = global_infimum(objectives)

    mean_local = 0.0
    for objective in objectives:
        mean_local += objective.lower_bound
    mean_local /= len(objectives)

    gap = f_inf - mean_local
    if gap < 0:
        if gap >= -_DELTA_ROUNDING * max(1.0, abs(f_inf), abs(mean_local)):
            return 0.0
        logger.error(f"Negative heterogeneity gap {gap:.6g}: f^inf={f_inf}, mean f_i^inf={mean_local}")
        raise ConfigurationError(
            f"Inconsistent infima: f^inf={f_inf} is below the mean local infimum {mean_local}"
        )
    return float(gap)
