"""
Local operators T_{gamma F}.

``GradientSteps`` runs T sequential stochastic gradient steps (FedAvg
family). ``Proximal`` approximates prox_{gamma F}(x) for one stochastic
sample with an inner gradient solver (FedProx family, one step per round).

Gradient steps are accumulated as a displacement u from the broadcast model,
y_t = x + u_t, so that the engine can aggregate displacements and a single
step reproduces x - gamma g bit for bit.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from numerics.exceptions import ConfigurationError
from numerics.random_streams import Purpose, RandomSource, as_generator
from numerics.vectors import ensure_finite
from problems.objective import Objective

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradientSteps:
    """T local stochastic gradient steps per round."""

    T: int = 1

    def __post_init__(self):
        if self.T < 1:
            raise ConfigurationError(f"GradientSteps needs T >= 1, got {self.T}")


@dataclass(frozen=True)
class Proximal:
    """
    Inexact stochastic proximal step.

    Attributes:
        inner_lr: Step of the inner gradient solver.
        inner_iters: Iteration budget of the inner solver.
        tolerance: When set, the solver stops early once the gradient of the
            regularized objective has norm at most ``tolerance``.
    """

    inner_lr: float = 0.1
    inner_iters: int = 50
    tolerance: Optional[float] = None

    def __post_init__(self):
        problems = []
        if self.inner_lr <= 0:
            problems.append(f"inner_lr must be positive, got {self.inner_lr}")
        if self.inner_iters < 1:
            problems.append(f"inner_iters must be positive, got {self.inner_iters}")
        if self.tolerance is not None and self.tolerance <= 0:
            problems.append(f"tolerance must be positive, got {self.tolerance}")
        if problems:
            raise ConfigurationError("Invalid proximal operator", problems)


LocalOperatorSpec = Union[GradientSteps, Proximal]


def local_steps(spec: LocalOperatorSpec) -> int:
    """Operator applications per round: T for gradient steps, 1 for prox."""
    if isinstance(spec, GradientSteps):
        return spec.T
    if isinstance(spec, Proximal):
        return 1
    raise TypeError(f"Unknown local operator {type(spec).__name__}")


def step_scale(spec: LocalOperatorSpec, rescale_by_T: bool) -> int:
    """
    Factor turning a schedule value into the step the bound constants use.

    With rescaling each of the T local gradient steps is gamma / T and the
    constants refer to gamma itself. Without it every local step is the full
    gamma, which corresponds to a theory step of T * gamma.
    """
    if isinstance(spec, GradientSteps) and not rescale_by_T:
        return spec.T
    return 1


def prox_inner_step(spec: Proximal, smoothness: float, gamma: float) -> Tuple[float, bool]:
    """Inner solver step ``min(inner_lr, 1 / (L + 1/gamma))`` and whether it was lowered."""
    return clamp_step(spec.inner_lr, 1.0 / (smoothness + 1.0 / gamma))


def stream_purpose(spec: LocalOperatorSpec) -> Purpose:
    """Random-stream tag used by a worker running ``spec``."""
    return Purpose.PROX if isinstance(spec, Proximal) else Purpose.GRADIENT


def gradient_displacement(
    p: Objective,
    x: np.ndarray,
    gamma: float,
    T: int,
    rng: RandomSource,
    trace: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """
    u_T where u_0 = 0 and u_{t+1} = u_t - gamma grad F(x + u_t; xi_t).

    Args:
        p: Worker objective.
        x: Broadcast model x^k (not modified).
        gamma: Round step size.
        T: Number of local steps.
        rng: Stream of this worker and round; each step takes fresh draws.
        trace: When given, every stochastic gradient is appended to it.

    Raises:
        DivergenceError: If an iterate becomes non-finite.
    """
    if gamma <= 0:
        raise ConfigurationError(f"Step size must be positive, got {gamma}")
    if T < 1:
        raise ConfigurationError(f"Local step count must be positive, got {T}")
    gen = as_generator(rng)
    x = np.asarray(x, dtype=np.float64)
    u = np.zeros_like(x)
    for t in range(T):
        grad = p.stochastic_gradient(x + u, gen)
        if trace is not None:
            trace.append(grad)
        u = u - gamma * grad
        ensure_finite(u, f"local gradient step {t}")
    return u


def apply_gradient_steps(
    p: Objective,
    x: np.ndarray,
    gamma: float,
    T: int,
    rng: RandomSource,
    trace: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """
    x^{k,T} after x^{k,t+1} = x^{k,t} - gamma grad F(x^{k,t}; xi^{k,t}).

    With T = 1 the result is exactly ``x - gamma * grad``.
    """
    return np.asarray(x, dtype=np.float64) + gradient_displacement(p, x, gamma, T, rng, trace)


def apply_prox(
    p: Objective,
    x: np.ndarray,
    gamma: float,
    spec: Proximal,
    rng: RandomSource,
    trace: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """
    Approximate argmin_y F(y; xi) + ||y - x||^2 / (2 gamma).

    One sample xi is drawn and held fixed for all inner iterations. The
    inner step is ``min(inner_lr, 1 / (L + 1/gamma))``; the regularized
    objective is (L + 1/gamma)-smooth, so larger steps can diverge for
    small gamma.

    Args:
        p: Worker objective.
        x: Prox center (not modified).
        gamma: Prox parameter.
        spec: Inner solver settings.
        rng: Stream of this worker and round.
        trace: When given, the implied gradient (x - y) / gamma is appended.

    Returns:
        The inner solver's final iterate.
    """
    if gamma <= 0:
        raise ConfigurationError(f"Prox parameter must be positive, got {gamma}")
    gen = as_generator(rng)
    sample = p.draw_sample(gen)
    center = np.array(x, dtype=np.float64)

    lr, lowered = prox_inner_step(spec, p.smoothness, gamma)
    if lowered:
        logger.debug(f"Inner prox step {spec.inner_lr} clamped to {lr:.3e}")

    y = center.copy()
    for it in range(spec.inner_iters):
        grad = p.sample_gradient(y, sample) + (y - center) / gamma
        if spec.tolerance is not None and float(np.linalg.norm(grad)) <= spec.tolerance:
            break
        y = y - lr * grad
        ensure_finite(y, f"prox inner iteration {it}")

    if trace is not None:
        trace.append((center - y) / gamma)
    return y


def apply_local(
    spec: LocalOperatorSpec,
    p: Objective,
    x: np.ndarray,
    gamma: float,
    rng: RandomSource,
    trace: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """Run the configured local operator on one worker and return x_i^k."""
    if isinstance(spec, GradientSteps):
        return apply_gradient_steps(p, x, gamma, spec.T, rng, trace)
    if isinstance(spec, Proximal):
        return apply_prox(p, x, gamma, spec, rng, trace)
    raise TypeError(f"Unknown local operator {type(spec).__name__}")


def local_displacement(
    spec: LocalOperatorSpec,
    p: Objective,
    x: np.ndarray,
    gamma: float,
    rng: RandomSource,
    trace: Optional[List[np.ndarray]] = None,
) -> np.ndarray:
    """x_i^k - x^k for the configured local operator."""
    if isinstance(spec, GradientSteps):
        return gradient_displacement(p, x, gamma, spec.T, rng, trace)
    if isinstance(spec, Proximal):
        return apply_prox(p, x, gamma, spec, rng, trace) - np.asarray(x, dtype=np.float64)
    raise TypeError(f"Unknown local operator {type(spec).__name__}")


def clamp_step(step: float, cap: float) -> Tuple[float, bool]:
    """Return ``(min(step, cap), clamped?)``."""
    if step > cap:
        return cap, True
    return step, False
