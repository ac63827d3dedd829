"""
Local fixed-point operators run by each worker within a round.
"""

from localops.operators import (
    GradientSteps,
    LocalOperatorSpec,
    Proximal,
    apply_gradient_steps,
    apply_local,
    apply_prox,
    clamp_step,
    gradient_displacement,
    local_displacement,
    local_steps,
    prox_inner_step,
    step_scale,
    stream_purpose,
)

__all__ = [
    "GradientSteps",
    "LocalOperatorSpec",
    "Proximal",
    "apply_gradient_steps",
    "apply_local",
    "apply_prox",
    "clamp_step",
    "gradient_displacement",
    "local_displacement",
    "local_steps",
    "prox_inner_step",
    "step_scale",
    "stream_purpose",
]
