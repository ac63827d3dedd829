"""
Turn an ``ExperimentConfig`` into problem instances, operator specs and
simulation setups.

Everything that defines the problem instance (dataset, partition, worker
objectives, x0) is drawn from ``problem.seed``; the run seeds only drive
the algorithm's own randomness, so seed averages estimate expectations
over the algorithm for one fixed instance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from compressors.contractive import (
    CompressorSpec,
    IdentityCompressor,
    ScaledSignCompressor,
    TopKCompressor,
    contraction_factor,
)
from data_ingestion.data_sources import BlobsSource, IdxSource, LabeledDataset
from data_ingestion.data_transformers import train_test_split
from data_processing.partition import Partition, partition
from federated.engine import SimulationSetup, algorithm_tag
from harness.config import ExperimentConfig
from localops.operators import GradientSteps, LocalOperatorSpec, Proximal, local_steps
from numerics.random_streams import Purpose, RngStream
from problems.aggregate import delta_inf, global_infimum, global_smoothness
from problems.estimation import estimate_global_infimum, estimate_noise_bound, estimate_smoothness
from problems.logistic import LogisticProblem
from problems.mlp import MlpProblem
from problems.objective import Objective
from problems.quadratic import make_heterogeneous_quadratics
from schedules.step_sizes import (
    DiminishingSchedule,
    FixedSchedule,
    ScheduleSpec,
    StepDecaySchedule,
    theoretical_decay_period,
)
from theory.constants import BoundConstants, algorithm_constants

logger = logging.getLogger(__name__)


@dataclass
class ProblemInstance:
    """
    A fixed problem instance shared by all seeds of an experiment.

    Attributes:
        objectives: Worker objectives.
        x0: Initial global model.
        f_inf: Infimum of the average objective (or its surrogate).
        f_inf_source: "analytic", "estimated" or "configured".
        evaluator: x -> test accuracy, for dataset problems with a test split.
        train: Training dataset (dataset problems only).
        test: Held-out dataset (dataset problems only).
        partition: Worker partition of ``train`` (dataset problems only).
    """

    objectives: List[Objective]
    x0: np.ndarray
    f_inf: float
    f_inf_source: str
    evaluator: Optional[Callable[[np.ndarray], float]] = None
    train: Optional[LabeledDataset] = None
    test: Optional[LabeledDataset] = None
    partition: Optional[Partition] = None

    @property
    def smoothness(self) -> float:
        return global_smoothness(self.objectives)

    @property
    def sigma_sq(self) -> float:
        return max(o.noise_bound for o in self.objectives)

    @property
    def delta(self) -> float:
        return delta_inf(self.objectives, self.f_inf)


def _stream(cfg: ExperimentConfig, purpose: Purpose, worker: int = 0) -> RngStream:
    return RngStream(cfg.get("problem.seed"), worker=worker, purpose=purpose)


def build_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    """Load or generate the dataset named by ``dataset.*``."""
    if cfg.get("dataset.kind") == "idx":
        source = IdxSource(cfg.get("dataset.images"), cfg.get("dataset.labels"),
                           n_classes=cfg.get("dataset.classes"), limit=cfg.get("dataset.limit"))
    else:
        source = BlobsSource(cfg.get("problem.seed"), cfg.get("dataset.classes"),
                             cfg.get("dataset.per_class"), cfg.get("dataset.dim"),
                             cfg.get("dataset.spread"))
    return source.extract_data()


def build_split(cfg: ExperimentConfig):
    """(train, test, partition of train) for dataset problems."""
    dataset = build_dataset(cfg)
    train, test = train_test_split(dataset, cfg.get("dataset.test_fraction"),
                                   _stream(cfg, Purpose.DATASET, worker=1))
    part = partition(train, cfg.get("partition.workers"), cfg.get("partition.mode"),
                     _stream(cfg, Purpose.PARTITION))
    return train, test, part


def _quadratic_instance(cfg: ExperimentConfig) -> ProblemInstance:
    objectives = make_heterogeneous_quadratics(
        cfg.get("problem.workers"),
        cfg.get("problem.dim"),
        spectrum_min=cfg.get("problem.spectrum_min"),
        spectrum_max=cfg.get("problem.spectrum_max"),
        radius=cfg.get("problem.radius"),
        sigma_sq=cfg.get("problem.sigma_sq"),
        seed=cfg.get("problem.seed"),
    )
    gen = _stream(cfg, Purpose.INIT, worker=1).generator()
    direction = gen.standard_normal(cfg.get("problem.dim"))
    x0 = cfg.get("run.x0_scale") * direction / np.linalg.norm(direction)
    if cfg.is_set("theory.f_inf"):
        return ProblemInstance(objectives, x0, cfg.get("theory.f_inf"), "configured")
    return ProblemInstance(objectives, x0, global_infimum(objectives), "analytic")


def _dataset_instance(cfg: ExperimentConfig) -> ProblemInstance:
    train, test, part = build_split(cfg)
    kind = cfg.problem_kind
    common = dict(n_classes=train.n_classes, batch_size=cfg.get("problem.batch_size"),
                  ridge=cfg.get("problem.ridge"))
    objectives: List[Objective] = []
    for indices in part.assignment:
        shard = train.subset(indices)
        if kind == "logistic":
            objectives.append(LogisticProblem(shard.features, shard.labels, **common))
        else:
            objectives.append(MlpProblem(shard.features, shard.labels,
                                         hidden=cfg.get("problem.hidden"), **common))

    if kind == "logistic":
        x0 = objectives[0].initial_point()
    else:
        x0 = objectives[0].initial_point(_stream(cfg, Purpose.INIT).generator())

    point_gen = _stream(cfg, Purpose.ESTIMATE).generator()
    points = [x0 + 0.1 * point_gen.standard_normal(x0.shape[0]) / math.sqrt(x0.shape[0])
              for _ in range(cfg.get("problem.noise_points"))]
    calibrated = []
    for i, objective in enumerate(objectives):
        sigma_sq = estimate_noise_bound(objective, points, cfg.get("problem.noise_samples"),
                                        _stream(cfg, Purpose.ESTIMATE, worker=i + 1))
        objective = objective.with_noise_bound(sigma_sq)
        if kind == "mlp":
            L = estimate_smoothness(objective, x0, 1.0, 16, _stream(cfg, Purpose.ESTIMATE, worker=i + 1))
            objective = objective.with_smoothness(L)
        calibrated.append(objective)
    logger.info(
        f"Calibrated {len(calibrated)} {kind} workers: sigma^2 <= {max(o.noise_bound for o in calibrated):.4g}, "
        f"L = {global_smoothness(calibrated):.4g}"
    )

    if cfg.is_set("theory.f_inf"):
        f_inf, source = cfg.get("theory.f_inf"), "configured"
    else:
        f_inf = estimate_global_infimum(calibrated, x0, steps=cfg.get("problem.f_inf_steps"))
        source = "estimated"

    evaluator = None
    if len(test) > 0:
        reference = calibrated[0]
        features, labels = test.features, test.labels

        def evaluator(x: np.ndarray) -> float:
            return reference.accuracy(x, features, labels)

    return ProblemInstance(calibrated, x0, f_inf, source, evaluator, train, test, part)


def build_problem(cfg: ExperimentConfig) -> ProblemInstance:
    """Build the worker objectives, x0 and f^inf."""
    if cfg.problem_kind == "quadratic":
        return _quadratic_instance(cfg)
    return _dataset_instance(cfg)


def build_local(cfg: ExperimentConfig) -> LocalOperatorSpec:
    if cfg.get("local.kind") == "gradient":
        return GradientSteps(cfg.get("local.T"))
    return Proximal(cfg.get("local.inner_lr"), cfg.get("local.inner_iters"), cfg.get("local.tolerance"))


def build_compressor(cfg: ExperimentConfig, d: int) -> Optional[CompressorSpec]:
    """The compressor for error-feedback runs, ``None`` for full precision."""
    if cfg.algorithm != "error_feedback":
        return None
    kind = cfg.get("compressor.kind")
    if kind == "identity":
        return IdentityCompressor()
    if kind == "sign":
        return ScaledSignCompressor()
    if cfg.is_set("compressor.fraction"):
        return TopKCompressor.from_fraction(cfg.get("compressor.fraction"), d)
    return TopKCompressor(cfg.get("compressor.k"))


def build_schedule(cfg: ExperimentConfig) -> ScheduleSpec:
    kind = cfg.get("schedule.kind")
    if kind == "fixed":
        return FixedSchedule(cfg.get("schedule.c"), cfg.rounds)
    if kind == "diminishing":
        return DiminishingSchedule(cfg.get("schedule.c"), cfg.get("schedule.nu"))
    base = cfg.get("schedule.decay_base")
    period = cfg.get("schedule.period")
    if period is None:
        period = theoretical_decay_period(cfg.rounds, base)
        logger.info(f"Step-decay period not set; using the theoretical period {period}")
    return StepDecaySchedule(cfg.get("schedule.gamma0"), base, period)


def build_setup(
    cfg: ExperimentConfig,
    instance: ProblemInstance,
    seed: int,
    threads: int = 1,
    record_trace: bool = False,
) -> SimulationSetup:
    """The engine input for one seed."""
    return SimulationSetup(
        objectives=instance.objectives,
        local=build_local(cfg),
        schedule=build_schedule(cfg),
        rounds=cfg.rounds,
        x0=instance.x0,
        seed=seed,
        f_inf=instance.f_inf,
        compressor=build_compressor(cfg, instance.x0.shape[0]),
        threads=threads,
        rescale_by_T=cfg.get("run.rescale_by_T"),
        cap_mode=cfg.get("run.cap_mode"),
        evaluator=instance.evaluator,
        eval_every=cfg.get("run.eval_every"),
        record_trace=record_trace,
    )


def build_constants(cfg: ExperimentConfig, instance: ProblemInstance) -> BoundConstants:
    """Sequence-inequality constants for the configured algorithm and instance."""
    local = build_local(cfg)
    error_feedback = cfg.algorithm == "error_feedback"
    contraction = 1.0
    if error_feedback:
        contraction = contraction_factor(build_compressor(cfg, instance.x0.shape[0]), instance.x0.shape[0])
    return algorithm_constants(
        algorithm_tag(error_feedback, local),
        instance.smoothness,
        local_steps(local),
        sigma_sq=instance.sigma_sq,
        delta=instance.delta,
        contraction=contraction,
    )
