"""
Checks measured trajectories against the closed-form bounds.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence

import numpy as np

from numerics.exceptions import ConfigurationError
from schedules.step_sizes import ScheduleSpec, StepDecaySchedule, scale_schedule, schedule_kind
from theory.bounds import StepDecayParams, step_decay_schedule_for, theorem_bound
from theory.constants import BoundConstants

if TYPE_CHECKING:
    from federated.records import RunRecord

logger = logging.getLogger(__name__)

# Default R is this factor times the largest observed V_k.
R_INFLATION = 1.1
# A bound counts as violated only beyond this many standard errors.
ERROR_BARS = 2.0


@dataclass
class Verdict:
    """Outcome of comparing measured min_k W_k with a bound."""

    theorem: str
    bound: Optional[float]
    measured_min_W: float
    margin: Optional[float]
    in_regime: bool
    seeds: List[int]
    violated: bool = False
    standard_error: float = 0.0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem": self.theorem,
            "bound": self.bound,
            "measured_min_W": self.measured_min_W,
            "margin": self.margin,
            "in_regime": self.in_regime,
            "seeds": list(self.seeds),
            "violated": self.violated,
            "standard_error": self.standard_error,
            "notes": list(self.notes),
        }


def _stack(records: Sequence["RunRecord"], attribute: str) -> np.ndarray:
    lengths = {len(getattr(r, attribute)) for r in records}
    if len(lengths) != 1:
        raise ConfigurationError(f"Records disagree on the length of {attribute}: {sorted(lengths)}")
    return np.array([getattr(r, attribute) for r in records], dtype=np.float64)


def verify_run(
    records: Sequence["RunRecord"],
    bc: BoundConstants,
    schedule: ScheduleSpec,
    R: Optional[float] = None,
) -> Verdict:
    """
    Compare min_k mean-over-seeds W_k (k < K) with the matching bound.

    The bound is evaluated at V0 = mean V_0 for the schedule in theory
    units, i.e. scaled by the records' ``step_scale`` (T for local gradient
    steps run without rescaling). A run is in regime only when no seed
    applied a theory step above ``bc.step_cap``; out-of-regime runs get no
    bound claim. A violation requires the measured minimum to exceed the
    bound by more than two standard errors of the seed mean.

    Args:
        records: One record per seed, all for the same configuration.
        bc: Constants of the algorithm that produced the records.
        schedule: Step-size schedule used by the runs.
        R: Uniform bound on V_k for step-decay; 1.1 times the largest
            observed V_k when omitted.

    Returns:
        A ``Verdict``.
    """
    if len(records) == 0:
        raise ConfigurationError("verify_run needs at least one record")
    kind = schedule_kind(schedule)
    seeds = [r.seed for r in records]

    grad = _stack(records, "grad_norms_sq")
    K = grad.shape[1] - 1
    if K < 1:
        raise ConfigurationError("verify_run needs at least one completed round")
    mean_W = grad[:, :K].mean(axis=0)
    argmin = int(np.argmin(mean_W))
    measured = float(mean_W[argmin])
    se = float(grad[:, argmin].std(ddof=1) / math.sqrt(len(records))) if len(records) > 1 else 0.0

    scales = sorted({float(r.step_scale) for r in records})
    if len(scales) != 1:
        raise ConfigurationError(f"Records disagree on step_scale: {scales}")

    notes = []
    violations = sum(r.cap_violations for r in records)
    in_regime = violations == 0
    if not in_regime:
        notes.append(f"{violations} round(s) used a step above the cap {bc.step_cap:.6g}")
        logger.warning(f"Run out of regime: {notes[-1]}")
        return Verdict(kind, None, measured, None, False, seeds, False, se, notes)

    V = _stack(records, "lyapunov")
    V0 = float(V[:, 0].mean())
    if isinstance(schedule, StepDecaySchedule) and R is None:
        R = R_INFLATION * float(V.max())
        notes.append(f"R estimated as {R_INFLATION} x max observed V = {R:.6g}")
    if scales[0] != 1.0:
        schedule = scale_schedule(schedule, scales[0])
        notes.append(f"bound evaluated at {scales[0]:g} x the schedule (local steps not rescaled by T)")
    if isinstance(schedule, StepDecaySchedule) and K >= 2:
        expected = step_decay_schedule_for(StepDecayParams(schedule.gamma0, schedule.decay_base, R), K)
        if expected.period != schedule.period:
            notes.append(
                f"step-decay bound assumes period {expected.period}; the run used {schedule.period}"
            )

    bound = theorem_bound(bc, schedule, max(V0, 0.0), K, R)
    margin = bound - measured
    violated = measured - ERROR_BARS * se > bound
    if violated:
        logger.warning(f"{kind} bound {bound:.6g} exceeded: measured {measured:.6g} +/- {se:.3g}")
    else:
        logger.info(f"{kind} bound {bound:.6g} holds: measured {measured:.6g} (margin {margin:.6g})")
    return Verdict(kind, bound, measured, margin, True, seeds, violated, se, notes)
