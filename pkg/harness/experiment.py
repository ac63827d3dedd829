"""
Multi-seed experiment orchestration and aggregation.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from federated.engine import run_error_feedback, run_full_precision
from federated.records import RunRecord
from harness.builders import ProblemInstance, build_constants, build_problem, build_schedule, build_setup
from harness.config import ExperimentConfig
from numerics.exceptions import ConfigurationError, DegenerateConstantsError, DivergenceError
from theory.constants import BoundConstants
from theory.verification import Verdict, verify_run

logger = logging.getLogger(__name__)

AGGREGATE_METRICS = ("loss_gap", "grad_norm_sq", "err_norm_sq", "test_acc")


@dataclass
class ExperimentResult:
    """
    Outcome of one experiment.

    Attributes:
        config: The configuration that was run.
        records: Completed per-seed records, in seed order.
        failed: Partial records of seeds that diverged.
        aggregate: Per-round mean and standard deviation across completed seeds.
        constants: Bound constants, when computable.
        verdict: Bound check, when constants are computable.
        notes: Non-fatal problems met along the way.
    """

    config: ExperimentConfig
    records: List[RunRecord]
    failed: List[RunRecord] = field(default_factory=list)
    aggregate: Optional[pd.DataFrame] = None
    constants: Optional[BoundConstants] = None
    verdict: Optional[Verdict] = None
    f_inf: Optional[float] = None
    f_inf_source: Optional[str] = None
    notes: List[str] = field(default_factory=list)

    @property
    def all_diverged(self) -> bool:
        return not self.records

    def summary(self) -> Dict[str, Any]:
        """JSON-ready summary; contains no timings so reruns are byte-identical."""
        return {
            "algorithm": self.config.algorithm,
            "rounds": self.config.rounds,
            "seeds": list(self.config.seeds),
            "f_inf": self.f_inf,
            "f_inf_source": self.f_inf_source,
            "constants": self.constants.to_dict() if self.constants else None,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "runs": [r.summary() for r in self.records],
            "diverged_seeds": [r.seed for r in self.failed],
            "notes": list(self.notes),
        }


def aggregate_records(records: Sequence[RunRecord]) -> pd.DataFrame:
    """
    Per-round mean and sample standard deviation over seeds.

    Columns: ``round``, ``gamma`` and ``<metric>_mean`` / ``<metric>_std``
    for each metric. The standard deviation is 0 for a single seed.

    Raises:
        ConfigurationError: If ``records`` is empty or lengths differ.
    """
    if not records:
        raise ConfigurationError("aggregate_records needs at least one record")
    frames = [r.to_frame() for r in records]
    if len({len(f) for f in frames}) != 1:
        raise ConfigurationError("Cannot aggregate records of different lengths")
    out = pd.DataFrame({"round": frames[0]["round"], "gamma": frames[0]["gamma"]})
    for metric in AGGREGATE_METRICS:
        stacked = np.vstack([f[metric].to_numpy(dtype=np.float64) for f in frames])
        out[f"{metric}_mean"] = stacked.mean(axis=0)
        out[f"{metric}_std"] = stacked.std(axis=0, ddof=1) if len(frames) > 1 else np.zeros(stacked.shape[1])
    return out


def _run_seed(cfg: ExperimentConfig, instance: ProblemInstance, seed: int, threads: int) -> RunRecord:
    setup = build_setup(cfg, instance, seed, threads)
    record = run_error_feedback(setup) if cfg.algorithm == "error_feedback" else run_full_precision(setup)
    record.config_echo = {"seed": str(seed), "algorithm": cfg.algorithm}
    return record


def run_experiment(
    cfg: ExperimentConfig,
    threads: Optional[int] = None,
    seed_workers: int = 1,
    instance: Optional[ProblemInstance] = None,
) -> ExperimentResult:
    """
    Run every seed of ``cfg`` and aggregate.

    Divergence of one seed is logged and recorded; the remaining seeds still
    run. Outputs do not depend on ``threads`` or ``seed_workers``.

    Args:
        cfg: Validated configuration.
        threads: Worker threads per round (``run.threads`` when omitted).
        seed_workers: Seeds simulated concurrently.
        instance: Pre-built problem instance (built from ``cfg`` when omitted).

    Returns:
        The ``ExperimentResult``.
    """
    threads = threads or cfg.get("run.threads")
    instance = instance or build_problem(cfg)
    result = ExperimentResult(cfg, [], f_inf=instance.f_inf, f_inf_source=instance.f_inf_source)
    if instance.f_inf_source == "estimated":
        result.notes.append("f_inf is a descent surrogate; loss gaps may be slightly negative")

    def attempt(seed: int):
        try:
            return _run_seed(cfg, instance, seed, threads)
        except DivergenceError as exc:
            logger.warning(f"Seed {seed} diverged: {exc}")
            return exc

    if seed_workers > 1:
        with ThreadPoolExecutor(max_workers=seed_workers) as pool:
            outcomes = list(pool.map(attempt, cfg.seeds))
    else:
        outcomes = [attempt(seed) for seed in cfg.seeds]

    for seed, outcome in zip(cfg.seeds, outcomes):
        if isinstance(outcome, DivergenceError):
            if outcome.record is not None:
                result.failed.append(outcome.record)
            result.notes.append(f"seed {seed} diverged: {outcome}")
        else:
            result.records.append(outcome)

    if result.all_diverged:
        logger.error(f"All {len(cfg.seeds)} seeds diverged")
        return result

    result.aggregate = aggregate_records(result.records)
    try:
        result.constants = build_constants(cfg, instance)
        result.verdict = verify_run(result.records, result.constants, build_schedule(cfg),
                                    R=cfg.get("theory.R"))
    except (DegenerateConstantsError, ConfigurationError) as exc:
        result.notes.append(f"no bound check: {exc}")
        logger.warning(f"Bound check skipped: {exc}")
    logger.info(
        f"Experiment finished: {len(result.records)} seed(s) completed, {len(result.failed)} diverged"
    )
    return result
