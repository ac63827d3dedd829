"""
Numerics module: dense parameter vectors, seeded random streams and the
exception types shared by every other package.
"""

from numerics.exceptions import (
    ConfigurationError,
    ContractViolationError,
    DegenerateConstantsError,
    DivergenceError,
    IngestionError,
    StepRangeError,
)
from numerics.random_streams import Purpose, RngStream, gaussian_vector
from numerics.vectors import (
    ParamVector,
    as_param_vector,
    ensure_finite,
    l2_norm_sq,
    mean_reduce,
)

__all__ = [
    "ConfigurationError",
    "ContractViolationError",
    "DegenerateConstantsError",
    "DivergenceError",
    "IngestionError",
    "StepRangeError",
    "Purpose",
    "RngStream",
    "gaussian_vector",
    "ParamVector",
    "as_param_vector",
    "ensure_finite",
    "l2_norm_sq",
    "mean_reduce",
]
