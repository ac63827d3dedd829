"""
Round engine for full-precision and error-feedback federated algorithms.

Each round the server broadcasts x^k, every worker runs its local operator
on its own random stream, and the server applies the mean of what the
workers send:

    full precision:  x^{k+1} = x^k + (1/n) sum_i (x_i^k - x^k)
    error feedback:  v_i = x_i^k - x^k + e_i^k,  e_i^{k+1} = v_i - Q(v_i),
                     x^{k+1} = x^k + (1/n) sum_i Q(v_i)

Worker results are reduced in ascending worker order, so the trajectory
does not depend on the thread count.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from compressors.contractive import CompressorSpec, IdentityCompressor, compress, contraction_factor
from federated.records import RoundTrace, RunRecord
from localops.operators import (
    GradientSteps,
    LocalOperatorSpec,
    Proximal,
    clamp_step,
    local_displacement,
    local_steps,
    prox_inner_step,
    step_scale,
    stream_purpose,
)
from numerics.exceptions import ConfigurationError, DivergenceError
from numerics.random_streams import RngStream
from numerics.vectors import as_param_vector, ensure_finite, l2_norm_sq, mean_reduce
from problems.aggregate import global_gradient, global_smoothness, global_value
from problems.objective import Objective
from schedules.step_sizes import ScheduleSpec, step_size
from theory.constants import (
    EF_FEDAVG,
    EF_FEDPROX,
    FEDAVG,
    FEDPROX,
    algorithm_constants,
    lyapunov_error_weight,
)

logger = logging.getLogger(__name__)

CAP_MODES = ("report", "clamp")


@dataclass(frozen=True)
class SimulationSetup:
    """
    Everything one seeded run needs.

    Attributes:
        objectives: Worker objectives f_1..f_n.
        local: Local operator run by every worker.
        schedule: Step-size schedule (values are the per-round local step).
        rounds: Number of rounds K.
        x0: Initial global model.
        seed: Master seed of all random streams.
        f_inf: Infimum (or surrogate) of the average objective.
        compressor: Compressor for error feedback; ignored by full precision.
        threads: Worker threads per round.
        rescale_by_T: Divide the schedule value by T for gradient steps.
        cap_mode: "report" counts rounds above the step cap, "clamp" also
            lowers the step to the cap.
        evaluator: Optional x -> test accuracy.
        eval_every: Evaluate the test accuracy every this many rounds.
        record_trace: Keep raw per-round vectors in ``RunRecord.trace``.
    """

    objectives: Sequence[Objective]
    local: LocalOperatorSpec
    schedule: ScheduleSpec
    rounds: int
    x0: np.ndarray
    seed: int
    f_inf: float
    compressor: Optional[CompressorSpec] = None
    threads: int = 1
    rescale_by_T: bool = True
    cap_mode: str = "report"
    evaluator: Optional[Callable[[np.ndarray], float]] = None
    eval_every: int = 1
    record_trace: bool = False

    def __post_init__(self):
        problems = []
        if len(self.objectives) == 0:
            problems.append("at least one worker objective is required")
        else:
            dims = {o.dimension for o in self.objectives}
            if len(dims) != 1:
                problems.append(f"worker dimensions differ: {sorted(dims)}")
            elif np.asarray(self.x0).shape != (dims.pop(),):
                problems.append(f"x0 has shape {np.asarray(self.x0).shape}, workers expect {self.objectives[0].dimension}")
        if self.rounds < 1:
            problems.append(f"rounds must be at least 1, got {self.rounds}")
        if self.threads < 1:
            problems.append(f"threads must be at least 1, got {self.threads}")
        if self.cap_mode not in CAP_MODES:
            problems.append(f"cap_mode must be one of {CAP_MODES}, got {self.cap_mode!r}")
        if self.eval_every < 1:
            problems.append(f"eval_every must be at least 1, got {self.eval_every}")
        if not math.isfinite(self.f_inf):
            problems.append(f"f_inf must be finite, got {self.f_inf}")
        if problems:
            raise ConfigurationError("Invalid simulation setup", problems)

    @property
    def n_workers(self) -> int:
        return len(self.objectives)

    @property
    def dimension(self) -> int:
        return self.objectives[0].dimension


@dataclass
class ServerState:
    """Global model x^k at round k."""

    x: np.ndarray
    round: int = 0


@dataclass
class WorkerState:
    """A worker's objective and error-feedback memory e_i^k."""

    index: int
    objective: Objective
    error: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.error is None:
            self.error = np.zeros(self.objective.dimension, dtype=np.float64)


@dataclass
class _WorkerResult:
    sent: np.ndarray
    error: np.ndarray
    grad_sum: Optional[np.ndarray]


def algorithm_tag(error_feedback: bool, local: LocalOperatorSpec) -> str:
    """Name of the algorithm run by ``local`` with or without error feedback."""
    proximal = not isinstance(local, GradientSteps)
    if error_feedback:
        return EF_FEDPROX if proximal else EF_FEDAVG
    return FEDPROX if proximal else FEDAVG


def step_cap(setup: SimulationSetup, error_feedback: bool) -> float:
    """Largest schedule value allowed by the algorithm's constants."""
    tag = algorithm_tag(error_feedback, setup.local)
    contraction = 1.0
    if error_feedback:
        contraction = contraction_factor(setup.compressor or IdentityCompressor(), setup.dimension)
    bc = algorithm_constants(
        tag, global_smoothness(setup.objectives), local_steps(setup.local), contraction=contraction
    )
    return bc.step_cap


def virtual_iterate(server: ServerState, workers: Sequence[WorkerState]) -> np.ndarray:
    """z^k = x^k + (1/n) sum_i e_i^k."""
    return server.x + mean_reduce([w.error for w in workers])


def _worker_round(
    setup: SimulationSetup,
    worker: WorkerState,
    x: np.ndarray,
    round_step: float,
    k: int,
    compressor: Optional[CompressorSpec],
) -> _WorkerResult:
    stream = RngStream(setup.seed, worker=worker.index, round=k, purpose=stream_purpose(setup.local))
    grads: Optional[List[np.ndarray]] = [] if setup.record_trace else None
    displacement = local_displacement(setup.local, worker.objective, x, round_step, stream, grads)
    grad_sum = None
    if grads is not None:
        grad_sum = np.zeros_like(x)
        for g in grads:
            grad_sum = grad_sum + g
    if compressor is None:
        return _WorkerResult(displacement, worker.error, grad_sum)
    v = displacement + worker.error
    q = compress(compressor, v)
    return _WorkerResult(q, v - q, grad_sum)


def _measure(
    setup: SimulationSetup,
    record: RunRecord,
    server: ServerState,
    workers: Sequence[WorkerState],
    error_feedback: bool,
    weight: float,
):
    x = server.x
    record.loss_gaps.append(global_value(setup.objectives, x) - setup.f_inf)
    record.grad_norms_sq.append(l2_norm_sq(global_gradient(setup.objectives, x)))
    error_sq = [l2_norm_sq(w.error) for w in workers]
    record.err_norms_sq.append(math.fsum(error_sq) / len(workers))

    evaluate = setup.evaluator is not None and (
        server.round % setup.eval_every == 0 or server.round == setup.rounds
    )
    record.test_acc.append(float(setup.evaluator(x)) if evaluate else math.nan)

    if error_feedback:
        z = virtual_iterate(server, workers)
        gap = global_value(setup.objectives, z) - setup.f_inf
        record.virtual_gaps.append(gap)
        record.lyapunov.append(gap + weight * math.fsum(error_sq))
    else:
        record.lyapunov.append(record.loss_gaps[-1])


def _simulate(setup: SimulationSetup, error_feedback: bool) -> RunRecord:
    compressor = None
    contraction = 1.0
    if error_feedback:
        if setup.compressor is None:
            raise ConfigurationError("Error feedback needs a compressor")
        compressor = setup.compressor
        contraction = contraction_factor(compressor, setup.dimension)

    tag = algorithm_tag(error_feedback, setup.local)
    L = global_smoothness(setup.objectives)
    cap = step_cap(setup, error_feedback)
    T = local_steps(setup.local)
    divide_by_T = setup.rescale_by_T and isinstance(setup.local, GradientSteps)
    scale = step_scale(setup.local, setup.rescale_by_T)

    server = ServerState(as_param_vector(setup.x0).copy(), 0)
    workers = [WorkerState(i, objective) for i, objective in enumerate(setup.objectives)]
    record = RunRecord(seed=setup.seed, algorithm=tag, step_cap=cap, cap_mode=setup.cap_mode, step_scale=scale)

    # Schedule values and the corresponding theory steps (scale * value).
    scheduled = [step_size(setup.schedule, k) for k in range(setup.rounds)]
    effective = [scale * s for s in scheduled]
    applied = [min(e, cap) if setup.cap_mode == "clamp" else e for e in effective]

    def error_weight(k: int) -> float:
        return lyapunov_error_weight(tag, L, applied[min(k, setup.rounds - 1)], contraction, setup.n_workers)

    _measure(setup, record, server, workers, error_feedback, error_weight(0))

    logger.info(
        f"Running {tag}: n={setup.n_workers}, d={setup.dimension}, K={setup.rounds}, "
        f"T={T}, seed={setup.seed}, cap={cap:.6g}"
    )
    executor = ThreadPoolExecutor(max_workers=setup.threads) if setup.threads > 1 else None
    try:
        for k in range(setup.rounds):
            started = time.perf_counter()
            step = scheduled[k]
            if effective[k] > cap:
                record.cap_violations += 1
                if setup.cap_mode == "clamp":
                    step = clamp_step(effective[k], cap)[0] / scale
                    record.clamped_rounds += 1
                if record.cap_violations == 1:
                    logger.warning(
                        f"{tag}: step {effective[k]:.6g} at round {k} exceeds the cap {cap:.6g} "
                        f"({'clamped' if setup.cap_mode == 'clamp' else 'reported only'})"
                    )
            round_step = step / T if divide_by_T else step
            if isinstance(setup.local, Proximal) and any(
                prox_inner_step(setup.local, obj.smoothness, round_step)[1] for obj in setup.objectives
            ):
                record.inner_clamped_rounds += 1
                if record.inner_clamped_rounds == 1:
                    logger.warning(
                        f"{tag}: inner prox step {setup.local.inner_lr:.6g} lowered to keep the inner "
                        f"solve stable (round {k}, prox parameter {round_step:.6g})"
                    )

            def work(worker: WorkerState) -> _WorkerResult:
                return _worker_round(setup, worker, server.x, round_step, k, compressor)

            if executor is None:
                results = [work(w) for w in workers]
            else:
                results = list(executor.map(work, workers))

            if setup.record_trace:
                record.trace.append(RoundTrace(
                    round=k,
                    x=server.x.copy(),
                    errors=[w.error.copy() for w in workers],
                    grad_sums=[r.grad_sum for r in results],
                    round_step=round_step,
                ))

            new_x = server.x + mean_reduce([r.sent for r in results])
            ensure_finite(new_x, f"global model after round {k}")
            server = ServerState(new_x, k + 1)
            for worker, result in zip(workers, results):
                worker.error = result.error

            record.gammas.append(step)
            record.round_steps.append(round_step)
            _measure(setup, record, server, workers, error_feedback, error_weight(k + 1))
            if not all(math.isfinite(v) for v in (record.loss_gaps[-1], record.grad_norms_sq[-1])):
                raise DivergenceError(f"non-finite metrics after round {k}")
            record.wall_times.append(time.perf_counter() - started)
    except DivergenceError as exc:
        record.diverged = True
        logger.error(f"{tag} diverged at round {server.round} (seed {setup.seed}): {exc}")
        raise DivergenceError(str(exc), record) from exc
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    if record.cap_violations:
        logger.warning(f"{tag}: {record.cap_violations}/{setup.rounds} rounds above the step cap")
    if record.inner_clamped_rounds:
        logger.warning(
            f"{tag}: inner prox step lowered in {record.inner_clamped_rounds}/{setup.rounds} rounds"
        )
    logger.info(
        f"{tag} finished: final loss gap {record.loss_gaps[-1]:.6g}, "
        f"min grad norm^2 {min(record.grad_norms_sq[:-1]):.6g}"
    )
    return record


def run_full_precision(setup: SimulationSetup) -> RunRecord:
    """
    Full-precision federated rounds (FedAvg or FedProx by local operator).

    Raises:
        DivergenceError: With the partial record, if an iterate becomes
            non-finite.
    """
    if setup.compressor is not None:
        logger.debug("Compressor ignored by the full-precision algorithm")
    return _simulate(setup, error_feedback=False)


def run_error_feedback(setup: SimulationSetup) -> RunRecord:
    """
    Error-feedback federated rounds (EF-FedAvg or EF-FedProx).

    With the identity compressor the trajectory is bit-identical to
    ``run_full_precision`` and every error stays zero.
    """
    return _simulate(setup, error_feedback=True)
