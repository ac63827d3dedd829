"""
Step-size schedules: fixed, diminishing and step-decay.
"""

from schedules.step_sizes import (
    DiminishingSchedule,
    FixedSchedule,
    ScheduleSpec,
    StepDecaySchedule,
    scale_schedule,
    schedule_kind,
    step_size,
    step_sizes,
    theoretical_decay_period,
)

__all__ = [
    "DiminishingSchedule",
    "FixedSchedule",
    "ScheduleSpec",
    "StepDecaySchedule",
    "scale_schedule",
    "schedule_kind",
    "step_size",
    "step_sizes",
    "theoretical_decay_period",
]
