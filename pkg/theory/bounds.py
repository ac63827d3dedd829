"""
Closed-form upper bounds on min_{k<K} W_k for sequences obeying the
sequence inequality, their inversion into iteration counts, and the two
step-size sum estimates the bounds rest on.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from numerics.exceptions import ConfigurationError, DegenerateConstantsError
from schedules.step_sizes import (
    DiminishingSchedule,
    FixedSchedule,
    ScheduleSpec,
    StepDecaySchedule,
    theoretical_decay_period,
)
from theory.constants import BoundConstants

logger = logging.getLogger(__name__)

# Relative slack when rounding an inverted bound up to an integer.
_CEIL_SLACK = 1e-12


@dataclass(frozen=True)
class StepDecayParams:
    """
    Step-decay bound parameters.

    Attributes:
        gamma0: Initial step.
        decay_base: Divisor applied once per period, > 1.
        R: Uniform bound on V_k, > 0.
    """

    gamma0: float
    decay_base: float
    R: float

    def __post_init__(self):
        problems = []
        if self.gamma0 <= 0:
            problems.append(f"gamma0 must be positive, got {self.gamma0}")
        if self.decay_base <= 1:
            problems.append(f"decay_base must exceed 1, got {self.decay_base}")
        if not self.R > 0:
            problems.append(f"R must be positive, got {self.R}")
        if problems:
            raise ConfigurationError("Invalid step-decay bound parameters", problems)


def _check_common(V0: float, K: int):
    if V0 < 0:
        raise ConfigurationError(f"V0 must be non-negative, got {V0}")
    if K < 1:
        raise ConfigurationError(f"K must be at least 1, got {K}")


def fixed_step_bound(V0: float, bc: BoundConstants, c: float, K: int) -> float:
    """
    Bound for gamma_k = c / sqrt(K):
    (1/sqrt(K)) (exp(b1 c^2) V0 / (b2 c) + b3 c / b2).

    Example:
        >>> fixed_step_bound(1.0, BoundConstants(0.0, 0.5, 0.0), 1.0, 100)
        0.2
    """
    _check_common(V0, K)
    if c <= 0:
        raise ConfigurationError(f"c must be positive, got {c}")
    scale = math.exp(bc.b1 * c**2) * V0 / (bc.b2 * c) + bc.b3 * c / bc.b2
    return scale / math.sqrt(K)


def _square_sum_limit(c: float, nu: float) -> float:
    return 2.0 * nu * c**2 / (2.0 * nu - 1.0)


def diminishing_step_bound(V0: float, bc: BoundConstants, c: float, nu: float, K: int) -> float:
    """
    Bound for gamma_k = c / (k+1)^nu:
    (1/K^(1-nu)) (V0/b2 + (b3/b2) S) exp(b1 S) / c with S = 2 nu c^2 / (2 nu - 1).
    """
    _check_common(V0, K)
    if c <= 0:
        raise ConfigurationError(f"c must be positive, got {c}")
    if not 0.5 < nu < 1.0:
        raise ConfigurationError(f"nu must lie in (1/2, 1), got {nu}")
    S = _square_sum_limit(c, nu)
    scale = (V0 / bc.b2 + (bc.b3 / bc.b2) * S) * math.exp(bc.b1 * S) / c
    return scale / K ** (1.0 - nu)


def step_decay_bound(V0: float, bc: BoundConstants, params: StepDecayParams, K: int) -> float:
    """
    Bound for gamma_k = gamma0 / base^floor(k / P) with the period
    P = 2K / log_base K rounded to an integer:

        R / (b2 gamma0 sqrt(K)) + C B log_base(K) / (2 gamma0 sqrt(K)),

    B = exp(2 b1 gamma0^2 / min(log_base 2, 1)) and C = (R + b3/b1) / b2.
    ``V0`` enters only through R >= V0.

    Raises:
        DegenerateConstantsError: If b1 = 0 (C is undefined); use the fixed
            or diminishing bound instead.
        ConfigurationError: If K < base^2, i.e. fewer than one full decay
            cycle fits in the horizon.
    """
    _check_common(V0, K)
    if bc.b1 == 0:
        logger.error("Step-decay bound requested with b1 = 0")
        raise DegenerateConstantsError(
            "Step-decay bound is undefined for b1 = 0; use the fixed or diminishing bound"
        )
    log_k = math.log(K) / math.log(params.decay_base)
    if log_k / 2.0 < 1.0 - 1e-12:
        raise ConfigurationError(
            f"Step-decay bound needs K >= decay_base^2 (K={K}, decay_base={params.decay_base})"
        )
    if V0 > params.R:
        raise ConfigurationError(f"R={params.R} is below V0={V0}")
    B = math.exp(2.0 * bc.b1 * params.gamma0**2 / min(math.log(2.0) / math.log(params.decay_base), 1.0))
    C = (params.R + bc.b3 / bc.b1) / bc.b2
    root_k = math.sqrt(K)
    return params.R / (bc.b2 * params.gamma0 * root_k) + C * B * log_k / (2.0 * params.gamma0 * root_k)


def step_decay_schedule_for(params: StepDecayParams, K: int) -> StepDecaySchedule:
    """The schedule the step-decay bound is stated for (theoretical period)."""
    return StepDecaySchedule(params.gamma0, params.decay_base, theoretical_decay_period(K, params.decay_base))


def theorem_bound(
    bc: BoundConstants,
    schedule: ScheduleSpec,
    V0: float,
    K: int,
    R: Optional[float] = None,
) -> float:
    """
    Dispatch to the bound matching the schedule kind.

    The fixed schedule's own horizon is ignored; c and K determine the step.
    The step-decay bound needs ``R``.
    """
    if isinstance(schedule, FixedSchedule):
        return fixed_step_bound(V0, bc, schedule.c, K)
    if isinstance(schedule, DiminishingSchedule):
        return diminishing_step_bound(V0, bc, schedule.c, schedule.nu, K)
    if isinstance(schedule, StepDecaySchedule):
        if R is None:
            raise ConfigurationError("The step-decay bound needs R (a uniform bound on V_k)")
        return step_decay_bound(V0, bc, StepDecayParams(schedule.gamma0, schedule.decay_base, R), K)
    raise TypeError(f"Unknown schedule {type(schedule).__name__}")


def _ceil(value: float) -> int:
    return max(1, int(math.ceil(value * (1.0 - _CEIL_SLACK))))


def iteration_complexity(
    bc: BoundConstants,
    V0: float,
    epsilon: float,
    schedule: ScheduleSpec,
    R: Optional[float] = None,
    max_rounds: int = 10**15,
) -> int:
    """
    Smallest horizon K for which the matching bound is at most ``epsilon``.

    Fixed and diminishing schedules invert the bound in closed form:
    K = (S/epsilon)^2 and K = (S/epsilon)^(1/(1-nu)) respectively, rounded up.
    Step-decay searches K by doubling then bisection over the range where
    the bound is decreasing.

    Example:
        >>> iteration_complexity(BoundConstants(0.0, 0.5, 0.0), 1.0, 0.2, FixedSchedule(1.0, 1))
        100
    """
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    if isinstance(schedule, FixedSchedule):
        scale = fixed_step_bound(V0, bc, schedule.c, 1)
        return _ceil((scale / epsilon) ** 2)
    if isinstance(schedule, DiminishingSchedule):
        scale = diminishing_step_bound(V0, bc, schedule.c, schedule.nu, 1)
        return _ceil((scale / epsilon) ** (1.0 / (1.0 - schedule.nu)))
    if not isinstance(schedule, StepDecaySchedule):
        raise TypeError(f"Unknown schedule {type(schedule).__name__}")

    # log K / sqrt K decreases for K > e^2; start past both that and base^2.
    low = max(8, int(math.ceil(schedule.decay_base**2)))

    def bound_at(K: int) -> float:
        return theorem_bound(bc, schedule, V0, K, R)

    if bound_at(low) <= epsilon:
        return low
    high = low
    while bound_at(high) > epsilon:
        if high >= max_rounds:
            raise ConfigurationError(f"No horizon below {max_rounds} reaches epsilon={epsilon}")
        low, high = high, min(2 * high, max_rounds)
    while high - low > 1:
        mid = (low + high) // 2
        if bound_at(mid) <= epsilon:
            high = mid
        else:
            low = mid
    return high


def growth_factor_holds(a: float, c: float, K: int) -> bool:
    """(1 + a gamma^2)^K <= exp(a c^2) for gamma = c / sqrt(K), a >= 0."""
    lhs = K * math.log1p(a * c**2 / K)
    return lhs <= a * c**2 * (1.0 + 1e-12)


def square_sum_holds(c: float, nu: float, K: int) -> bool:
    """sum_{k<K} (c / (k+1)^nu)^2 <= 2 nu c^2 / (2 nu - 1) for nu in (1/2, 1)."""
    k = np.arange(1, K + 1, dtype=np.float64)
    total = float(np.sum(c**2 / k ** (2.0 * nu)))
    return total <= _square_sum_limit(c, nu) * (1.0 + 1e-12)
