"""
Step-size rules gamma_k.

Naming: ``decay_base`` is the step-decay divisor (applied once per
``period`` rounds). It is unrelated to a compressor's ``contraction`` and to
the per-round ``local_step`` of the federated engine.
"""

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from numerics.exceptions import ConfigurationError, StepRangeError


@dataclass(frozen=True)
class FixedSchedule:
    """gamma_k = c / sqrt(K) for k < K."""

    c: float
    horizon: int

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigurationError(f"Fixed schedule needs c > 0, got {self.c}")
        if self.horizon < 1:
            raise ConfigurationError(f"Fixed schedule needs a horizon K >= 1, got {self.horizon}")


@dataclass(frozen=True)
class DiminishingSchedule:
    """gamma_k = c / (k + 1)^nu with nu in (1/2, 1)."""

    c: float
    nu: float

    def __post_init__(self):
        if self.c <= 0:
            raise ConfigurationError(f"Diminishing schedule needs c > 0, got {self.c}")
        if not 0.5 < self.nu < 1.0:
            raise ConfigurationError(f"Diminishing schedule needs nu in (1/2, 1), got {self.nu}")


@dataclass(frozen=True)
class StepDecaySchedule:
    """gamma_k = gamma0 / decay_base^floor(k / period)."""

    gamma0: float
    decay_base: float
    period: int

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise ConfigurationError(f"Step-decay schedule needs gamma0 > 0, got {self.gamma0}")
        if self.decay_base <= 1:
            raise ConfigurationError(f"Step-decay schedule needs decay_base > 1, got {self.decay_base}")
        if self.period < 1:
            raise ConfigurationError(f"Step-decay schedule needs period >= 1, got {self.period}")


ScheduleSpec = Union[FixedSchedule, DiminishingSchedule, StepDecaySchedule]


def schedule_kind(schedule: ScheduleSpec) -> str:
    """Short tag: "fixed", "diminishing" or "step_decay"."""
    if isinstance(schedule, FixedSchedule):
        return "fixed"
    if isinstance(schedule, DiminishingSchedule):
        return "diminishing"
    if isinstance(schedule, StepDecaySchedule):
        return "step_decay"
    raise TypeError(f"Unknown schedule type {type(schedule).__name__}")


def step_size(schedule: ScheduleSpec, k: int) -> float:
    """
    Step size of round ``k``.

    Step-size caps are not applied here; the federated engine does that.

    Args:
        schedule: The schedule.
        k: Round index, k >= 0 (and k < K for a fixed schedule).

    Returns:
        The positive step gamma_k.

    Raises:
        StepRangeError: If k is negative or beyond a fixed schedule's horizon.

    Example:
        >>> step_size(StepDecaySchedule(gamma0=0.8, decay_base=2, period=50), 75)
        0.4
    """
    if k < 0:
        raise StepRangeError(f"Round index must be non-negative, got {k}")
    if isinstance(schedule, FixedSchedule):
        if k >= schedule.horizon:
            raise StepRangeError(f"Round {k} is outside the fixed horizon K={schedule.horizon}")
        return schedule.c / math.sqrt(schedule.horizon)
    if isinstance(schedule, DiminishingSchedule):
        return schedule.c / (k + 1) ** schedule.nu
    if isinstance(schedule, StepDecaySchedule):
        return schedule.gamma0 / schedule.decay_base ** (k // schedule.period)
    raise TypeError(f"Unknown schedule type {type(schedule).__name__}")


def scale_schedule(schedule: ScheduleSpec, factor: float) -> ScheduleSpec:
    """
    The same schedule with every step multiplied by ``factor``.

    Example:
        >>> scale_schedule(FixedSchedule(0.4, 100), 30)
        FixedSchedule(c=12.0, horizon=100)
    """
    if factor <= 0:
        raise ConfigurationError(f"Schedule scale must be positive, got {factor}")
    if isinstance(schedule, (FixedSchedule, DiminishingSchedule)):
        return replace(schedule, c=schedule.c * factor)
    if isinstance(schedule, StepDecaySchedule):
        return replace(schedule, gamma0=schedule.gamma0 * factor)
    raise TypeError(f"Unknown schedule type {type(schedule).__name__}")


def step_sizes(schedule: ScheduleSpec, K: int) -> np.ndarray:
    """gamma_0 .. gamma_{K-1} as an array."""
    return np.array([step_size(schedule, k) for k in range(K)], dtype=np.float64)


def theoretical_decay_period(K: int, decay_base: float) -> int:
    """
    Period T = 2K / log_base(K) of the step-decay convergence bound.

    The value is rounded to the nearest integer (at least 1); the bound
    assumes K is a multiple of T, which rounding only approximates.

    Raises:
        ConfigurationError: If K < 2 or decay_base <= 1.

    Example:
        >>> theoretical_decay_period(400, 2)
        93
    """
    if K < 2:
        raise ConfigurationError(f"Theoretical decay period needs K >= 2, got {K}")
    if decay_base <= 1:
        raise ConfigurationError(f"decay_base must exceed 1, got {decay_base}")
    period = 2.0 * K / (math.log(K) / math.log(decay_base))
    return max(1, int(round(period)))
