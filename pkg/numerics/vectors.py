"""
Dense parameter-vector helpers.

A ``ParamVector`` is a one-dimensional float64 numpy array. Operations never
modify their inputs.
"""

import logging
from typing import Sequence

import numpy as np

from numerics.exceptions import ConfigurationError, DivergenceError

logger = logging.getLogger(__name__)

ParamVector = np.ndarray


def as_param_vector(values) -> ParamVector:
    """
    Convert ``values`` into a contiguous 1-D float64 array.

    Args:
        values: Any array-like of reals.

    Returns:
        A new float64 array.

    Raises:
        ConfigurationError: If the input is not one-dimensional or holds
            non-finite entries.
    """
    v = np.atleast_1d(np.array(values, dtype=np.float64))
    if v.ndim != 1:
        raise ConfigurationError(f"Parameter vector must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConfigurationError("Parameter vector contains NaN or Inf entries")
    return v


def ensure_finite(v: ParamVector, context: str) -> ParamVector:
    """Raise ``DivergenceError`` if ``v`` has a NaN or Inf entry."""
    if not np.all(np.isfinite(v)):
        logger.error(f"Non-finite iterate detected in {context}")
        raise DivergenceError(f"Non-finite iterate in {context}")
    return v


def l2_norm_sq(v: ParamVector) -> float:
    """
    Squared Euclidean norm.

    Args:
        v: Finite parameter vector.

    Returns:
        The sum of squared entries; exactly 0.0 only for the zero vector.

    Example:
        >>> l2_norm_sq(np.array([3.0, 4.0]))
        25.0
    """
    v = np.asarray(v, dtype=np.float64)
    return float(np.dot(v, v))


def mean_reduce(vs: Sequence[ParamVector]) -> ParamVector:
    """
    Coordinate-wise mean with a fixed summation order.

    Offsets from the first vector are accumulated one at a time in list order
    (ascending worker index), so the result does not depend on how the inputs
    were computed, and n copies of one vector average to that vector exactly.

    Args:
        vs: Non-empty list of equal-length vectors.

    Returns:
        The arithmetic mean vector.

    Raises:
        ConfigurationError: If the list is empty or lengths differ.

    Example:
        >>> mean_reduce([np.array([1.0, 1.0]), np.array([3.0, 3.0])])
        array([2., 2.])
    """
    if len(vs) == 0:
        raise ConfigurationError("mean_reduce needs at least one vector")

    first = np.asarray(vs[0], dtype=np.float64)
    offset = np.zeros_like(first)
    for i, v in enumerate(vs[1:], start=1):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != first.shape:
            raise ConfigurationError(
                f"Length mismatch in mean_reduce: vector {i} has shape {v.shape}, "
                f"expected {first.shape}"
            )
        offset += v - first

    return first + offset / len(vs)
