"""
Exact recursion oracle and random worst-case instances.

``recursion_oracle`` runs the sequence inequality with equality. Any (V, W)
pair it returns is a legal sequence for the bounds, so sampling many of them
is an independent check of the closed forms.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from numerics.exceptions import ConfigurationError, ContractViolationError
from numerics.random_streams import Purpose, RandomSource, RngStream, as_generator
from schedules.step_sizes import (
    DiminishingSchedule,
    FixedSchedule,
    ScheduleSpec,
    StepDecaySchedule,
    step_sizes,
    theoretical_decay_period,
)
from theory.bounds import growth_factor_holds, square_sum_holds, theorem_bound
from theory.constants import BoundConstants

logger = logging.getLogger(__name__)

SCHEDULE_KINDS = ("fixed", "diminishing", "step_decay")

# W is sampled strictly below its admissible maximum so V stays non-negative
# under rounding.
_W_MARGIN = 1.0 - 1e-12


def recursion_oracle(
    V0: float,
    bc: BoundConstants,
    gammas: Sequence[float],
    W: Sequence[float],
) -> np.ndarray:
    """
    V_{k+1} = (1 + b1 g_k^2) V_k - b2 g_k W_k + b3 g_k^2.

    Args:
        V0: Initial value, >= 0.
        bc: Coefficients.
        gammas: Positive steps g_0..g_{K-1}.
        W: Non-negative W_0..W_{K-1}.

    Returns:
        Array V_0..V_K.

    Raises:
        ConfigurationError: On negative inputs or mismatched lengths.
        ContractViolationError: If some V_{k+1} would be negative.

    Example:
        >>> recursion_oracle(1.0, BoundConstants(0.0, 1.0, 0.0), [0.1] * 5, [1.0] * 5)
        array([1. , 0.9, 0.8, 0.7, 0.6, 0.5])
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if gammas.shape != W.shape or gammas.ndim != 1:
        raise ConfigurationError(f"gammas {gammas.shape} and W {W.shape} must be equal-length vectors")
    if V0 < 0 or np.any(gammas <= 0) or np.any(W < 0):
        raise ConfigurationError("V0 and W must be non-negative and every step positive")

    V = np.empty(gammas.shape[0] + 1, dtype=np.float64)
    V[0] = V0
    for k, (g, w) in enumerate(zip(gammas, W)):
        nxt = (1.0 + bc.b1 * g * g) * V[k] - bc.b2 * g * w + bc.b3 * g * g
        if nxt < 0:
            raise ContractViolationError(f"V_{k + 1} = {nxt:.6g} < 0: W_{k} = {w} is too large")
        V[k + 1] = nxt
    return V


@dataclass(frozen=True)
class RecursionInstance:
    """One random worst-case sequence and the bound it must satisfy."""

    kind: str
    bc: BoundConstants
    schedule: ScheduleSpec
    V: np.ndarray
    W: np.ndarray
    R: Optional[float]
    bound: float

    @property
    def min_W(self) -> float:
        return float(self.W.min())

    @property
    def violated(self) -> bool:
        return self.min_W > self.bound


def _random_schedule(gen: np.random.Generator, kind: str):
    if kind == "fixed":
        K = int(gen.integers(2, 501))
        c = float(gen.uniform(0.05, 3.0))
        return FixedSchedule(c, K), K, c
    if kind == "diminishing":
        K = int(gen.integers(2, 501))
        c = float(gen.uniform(0.05, 3.0))
        nu = float(gen.uniform(0.51, 0.99))
        return DiminishingSchedule(c, nu), K, c
    if kind == "step_decay":
        base = float(gen.uniform(1.5, 4.0))
        K = int(gen.integers(int(math.ceil(base**2)), 501))
        gamma0 = float(gen.uniform(0.05, 1.5))
        return StepDecaySchedule(gamma0, base, theoretical_decay_period(K, base)), K, gamma0
    raise ConfigurationError(f"Unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")


def random_recursion_instance(rng: RandomSource, kind: str) -> RecursionInstance:
    """
    Draw constants, a schedule and W, then run the oracle.

    W_k is uniform on [0, ((1 + b1 g^2) V_k + b3 g^2) / (b2 g)), the whole
    admissible range. b1 is kept small enough that exp(b1 c^2) stays finite
    and is positive for step-decay instances.
    """
    gen = as_generator(rng)
    schedule, K, scale = _random_schedule(gen, kind)
    b1_max = min(2.0, 50.0 / scale**2)
    b1_min = 0.01 if kind == "step_decay" else 0.0
    bc = BoundConstants(
        b1=float(gen.uniform(b1_min, b1_max)),
        b2=float(gen.uniform(0.1, 1.0)),
        b3=float(gen.uniform(0.0, 2.0)),
    )
    V0 = float(gen.uniform(0.01, 10.0))

    gammas = step_sizes(schedule, K)
    V = np.empty(K + 1)
    W = np.empty(K)
    V[0] = V0
    for k in range(K):
        g = gammas[k]
        w_max = ((1.0 + bc.b1 * g * g) * V[k] + bc.b3 * g * g) / (bc.b2 * g)
        W[k] = gen.uniform(0.0, w_max * _W_MARGIN)
        V[k + 1] = recursion_oracle(V[k], bc, [g], [W[k]])[1]

    R = float(V.max()) if kind == "step_decay" else None
    bound = theorem_bound(bc, schedule, V0, K, R)
    return RecursionInstance(kind, bc, schedule, V, W, R, bound)


@dataclass(frozen=True)
class SweepResult:
    kind: str
    trials: int
    violations: int
    worst_ratio: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
        }


def soundness_sweep(trials: int, kind: str, seed: int = 0) -> SweepResult:
    """
    Check min_k W_k <= bound on ``trials`` random oracle instances.

    ``worst_ratio`` is the largest min_k W_k / bound seen (below 1 when
    nothing is violated).
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be positive, got {trials}")
    violations = 0
    worst = 0.0
    for trial in range(trials):
        stream = RngStream(seed, worker=SCHEDULE_KINDS.index(kind) if kind in SCHEDULE_KINDS else 0,
                           round=trial, purpose=Purpose.ORACLE)
        instance = random_recursion_instance(stream, kind)
        if instance.violated:
            violations += 1
            logger.warning(
                f"{kind} bound violated on trial {trial}: min W {instance.min_W:.6g} > {instance.bound:.6g}"
            )
        if instance.bound > 0:
            worst = max(worst, instance.min_W / instance.bound)
    logger.info(f"{kind} soundness sweep: {violations}/{trials} violations, worst ratio {worst:.3g}")
    return SweepResult(kind, trials, violations, worst)


def step_sum_sweep(points: int, seed: int = 0) -> Dict[str, int]:
    """
    Random sweep of the two step-size sum estimates.

    Returns:
        Violation counts under keys "growth_factor" and "square_sum".
    """
    gen = RngStream(seed, purpose=Purpose.ORACLE).generator()
    counts = {"growth_factor": 0, "square_sum": 0}
    for _ in range(points):
        a = float(gen.uniform(0.0, 10.0))
        c = float(gen.uniform(0.01, 3.0))
        K = int(gen.integers(1, 1001))
        nu = float(gen.uniform(0.501, 0.999))
        if not growth_factor_holds(a, c, K):
            counts["growth_factor"] += 1
        if not square_sum_holds(c, nu, K):
            counts["square_sum"] += 1
    logger.info(f"Step-size sum sweep over {points} points: {counts}")
    return counts
