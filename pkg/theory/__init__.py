"""
Convergence machinery: sequence-inequality constants for each federated
algorithm, closed-form bounds, iteration counts, the exact recursion oracle
and checks of measured runs against the bounds.
"""

from theory.bounds import (
    StepDecayParams,
    diminishing_step_bound,
    fixed_step_bound,
    growth_factor_holds,
    iteration_complexity,
    square_sum_holds,
    step_decay_bound,
    step_decay_schedule_for,
    theorem_bound,
)
from theory.constants import (
    EF_FEDAVG,
    EF_FEDPROX,
    FEDAVG,
    FEDPROX,
    MANUAL,
    BoundConstants,
    algorithm_constants,
    lyapunov_error_weight,
)
from theory.recursion import (
    SCHEDULE_KINDS,
    RecursionInstance,
    SweepResult,
    step_sum_sweep,
    random_recursion_instance,
    recursion_oracle,
    soundness_sweep,
)
from theory.verification import Verdict, verify_run

__all__ = [
    "EF_FEDAVG",
    "EF_FEDPROX",
    "FEDAVG",
    "FEDPROX",
    "MANUAL",
    "SCHEDULE_KINDS",
    "BoundConstants",
    "RecursionInstance",
    "StepDecayParams",
    "SweepResult",
    "Verdict",
    "algorithm_constants",
    "diminishing_step_bound",
    "fixed_step_bound",
    "growth_factor_holds",
    "iteration_complexity",
    "step_sum_sweep",
    "lyapunov_error_weight",
    "random_recursion_instance",
    "recursion_oracle",
    "soundness_sweep",
    "square_sum_holds",
    "step_decay_bound",
    "step_decay_schedule_for",
    "theorem_bound",
    "verify_run",
]
