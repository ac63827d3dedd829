"""
Monte-Carlo and optimization-based estimates of the constants that are not
available in closed form for logistic and MLP objectives.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from numerics.exceptions import ConfigurationError
from numerics.random_streams import RandomSource, as_generator
from problems.aggregate import global_gradient, global_smoothness, global_value
from problems.objective import Objective

logger = logging.getLogger(__name__)


def finite_difference_gradient(func: Callable[[np.ndarray], float], x: np.ndarray,
                               step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for j in range(x.shape[0]):
        forward = x.copy()
        backward = x.copy()
        forward[j] += step
        backward[j] -= step
        grad[j] = (func(forward) - func(backward)) / (2.0 * step)
    return grad


def estimate_noise_bound(objective: Objective, points: Sequence[np.ndarray],
                         samples: int, rng: RandomSource) -> float:
    """
    Estimate sigma^2 = max over points of E||grad F(x; xi) - grad f(x)||^2.

    Args:
        objective: Worker objective.
        points: Points at which the variance is measured.
        samples: Monte-Carlo draws per point.
        rng: Random source for the draws.

    Returns:
        The largest empirical second moment of the deviation.
    """
    if samples < 1 or len(points) == 0:
        raise ConfigurationError("estimate_noise_bound needs points and a positive sample count")
    gen = as_generator(rng)
    worst = 0.0
    for x in points:
        full = objective.full_gradient(x)
        total = 0.0
        for _ in range(samples):
            deviation = objective.stochastic_gradient(x, gen) - full
            total += float(deviation @ deviation)
        worst = max(worst, total / samples)
    return worst


def estimate_smoothness(objective: Objective, center: np.ndarray, radius: float,
                        pairs: int, rng: RandomSource, safety: float = 2.0) -> float:
    """
    Empirical gradient-Lipschitz constant over a ball around ``center``.

    Returns ``safety`` times the largest ratio
    ||grad f(x) - grad f(y)|| / ||x - y|| over random pairs in the ball.
    """
    gen = as_generator(rng)
    center = np.asarray(center, dtype=np.float64)
    worst = 0.0
    for _ in range(pairs):
        x = center + radius * gen.standard_normal(center.shape[0]) / np.sqrt(center.shape[0])
        y = x + 1e-2 * radius * gen.standard_normal(center.shape[0]) / np.sqrt(center.shape[0])
        distance = np.linalg.norm(x - y)
        if distance == 0:
            continue
        ratio = np.linalg.norm(objective.full_gradient(x) - objective.full_gradient(y)) / distance
        worst = max(worst, float(ratio))
    return safety * worst if worst > 0 else safety


def estimate_global_infimum(objectives: Sequence[Objective], x0: np.ndarray,
                            steps: int = 2000, lr: Optional[float] = None) -> float:
    """
    Surrogate f^inf from a long full-gradient descent run on the average.

    The returned value is the best objective value seen. It is an upper
    estimate of the true infimum, so loss gaps computed against it can be
    slightly negative; they are reported both raw and shifted.
    """
    if lr is None:
        lr = 1.0 / global_smoothness(objectives)
    x = np.array(x0, dtype=np.float64)
    best = global_value(objectives, x)
    for _ in range(steps):
        x = x - lr * global_gradient(objectives, x)
        if not np.all(np.isfinite(x)):
            logger.warning("Infimum estimation diverged; keeping best value so far")
            break
        best = min(best, global_value(objectives, x))
    logger.info(f"Estimated f^inf = {best:.6g} after {steps} descent steps")
    return best
