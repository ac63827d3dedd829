"""
Experiment configuration: a strict, line-oriented ``key = value`` format.

Keys are dotted (``run.rounds``); a ``[section]`` header prefixes the keys
that follow it; ``#`` starts a comment. Unknown keys, bad values and
cross-field inconsistencies are collected and reported together in one
``ConfigurationError``.

Example:
    [run]
    algorithm = error_feedback
    rounds = 400
    seeds = 1, 2, 3, 4, 5

    [problem]
    kind = quadratic
    workers = 10
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from numerics.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

ALGORITHMS = ("full_precision", "error_feedback")
PROBLEM_KINDS = ("quadratic", "logistic", "mlp")
DATASET_KINDS = ("idx", "blobs")
PARTITION_MODES = ("iid", "noniid2", "noniid1")
LOCAL_KINDS = ("gradient", "prox")
COMPRESSOR_KINDS = ("identity", "topk", "sign")
SCHEDULE_KINDS = ("fixed", "diminishing", "step_decay")
CAP_MODES = ("report", "clamp")


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _parse_str(text: str) -> str:
    if not text:
        raise ValueError("expected a non-empty value")
    return text


def _parse_seeds(text: str) -> Tuple[int, ...]:
    seeds = tuple(int(part) for part in text.split(",") if part.strip())
    if not seeds:
        raise ValueError("expected at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValueError(f"duplicate seeds in {text!r}")
    if any(s < 0 for s in seeds):
        raise ValueError("seeds must be non-negative")
    return seeds


def _choice(options: Tuple[str, ...]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


# key -> (parser, default); a default of None means "absent unless set".
SCHEMA: Dict[str, Tuple[Callable[[str], Any], Any]] = {
    "run.algorithm": (_choice(ALGORITHMS), "full_precision"),
    "run.rounds": (_parse_int, 400),
    "run.seeds": (_parse_seeds, (7,)),
    "run.x0_scale": (_parse_float, 1.0),
    "run.rescale_by_T": (_parse_bool, True),
    "run.cap_mode": (_choice(CAP_MODES), "report"),
    "run.threads": (_parse_int, 1),
    "run.out": (_parse_str, "results"),
    "run.eval_every": (_parse_int, 1),
    "problem.kind": (_choice(PROBLEM_KINDS), "quadratic"),
    "problem.seed": (_parse_int, 0),
    "problem.workers": (_parse_int, 10),
    "problem.dim": (_parse_int, 20),
    "problem.spectrum_min": (_parse_float, 0.1),
    "problem.spectrum_max": (_parse_float, 1.0),
    "problem.radius": (_parse_float, 1.0),
    "problem.sigma_sq": (_parse_float, 0.1),
    "problem.batch_size": (_parse_int, 64),
    "problem.ridge": (_parse_float, 1e-3),
    "problem.hidden": (_parse_int, 16),
    "problem.f_inf_steps": (_parse_int, 2000),
    "problem.noise_points": (_parse_int, 8),
    "problem.noise_samples": (_parse_int, 64),
    "dataset.kind": (_choice(DATASET_KINDS), "blobs"),
    "dataset.images": (_parse_str, None),
    "dataset.labels": (_parse_str, None),
    "dataset.classes": (_parse_int, 10),
    "dataset.per_class": (_parse_int, 100),
    "dataset.dim": (_parse_int, 20),
    "dataset.spread": (_parse_float, 1.0),
    "dataset.test_fraction": (_parse_float, 0.2),
    "dataset.limit": (_parse_int, None),
    "partition.mode": (_choice(PARTITION_MODES), "iid"),
    "partition.workers": (_parse_int, 10),
    "local.kind": (_choice(LOCAL_KINDS), "gradient"),
    "local.T": (_parse_int, 30),
    "local.inner_lr": (_parse_float, 0.1),
    "local.inner_iters": (_parse_int, 50),
    "local.tolerance": (_parse_float, None),
    "compressor.kind": (_choice(COMPRESSOR_KINDS), "identity"),
    "compressor.k": (_parse_int, None),
    "compressor.fraction": (_parse_float, None),
    "schedule.kind": (_choice(SCHEDULE_KINDS), "fixed"),
    "schedule.c": (_parse_float, None),
    "schedule.nu": (_parse_float, None),
    "schedule.gamma0": (_parse_float, None),
    "schedule.decay_base": (_parse_float, None),
    "schedule.period": (_parse_int, None),
    "theory.R": (_parse_float, None),
    "theory.f_inf": (_parse_float, None),
}

QUADRATIC_KEYS = ("problem.workers", "problem.dim", "problem.spectrum_min",
                  "problem.spectrum_max", "problem.radius", "problem.sigma_sq")
DATASET_PROBLEM_KEYS = ("problem.batch_size", "problem.ridge", "problem.f_inf_steps",
                        "problem.noise_points", "problem.noise_samples")
SCHEDULE_KEYS = {
    "fixed": ("schedule.c",),
    "diminishing": ("schedule.c", "schedule.nu"),
    "step_decay": ("schedule.gamma0", "schedule.decay_base", "schedule.period"),
}
POSITIVE_INTS = ("run.rounds", "run.threads", "run.eval_every", "problem.workers", "problem.dim",
                 "problem.batch_size", "problem.hidden", "problem.f_inf_steps",
                 "problem.noise_points", "problem.noise_samples", "dataset.classes",
                 "dataset.per_class", "dataset.dim", "dataset.limit", "partition.workers",
                 "local.T", "local.inner_iters", "compressor.k", "schedule.period")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A validated experiment configuration.

    Only explicitly set keys are stored; ``get`` falls back to the schema
    default.
    """

    values: Dict[str, Any] = field(default_factory=dict)

    def get(self, key: str) -> Any:
        if key not in SCHEMA:
            raise KeyError(key)
        if key in self.values:
            return self.values[key]
        return SCHEMA[key][1]

    def is_set(self, key: str) -> bool:
        return key in self.values

    def replace(self, **updates: Any) -> "ExperimentConfig":
        """Copy with dotted keys given as ``section__name=value``; re-validated."""
        values = dict(self.values)
        for name, value in updates.items():
            values[name.replace("__", ".", 1)] = value
        return validate_config(values)

    @property
    def algorithm(self) -> str:
        return self.get("run.algorithm")

    @property
    def rounds(self) -> int:
        return self.get("run.rounds")

    @property
    def seeds(self) -> Tuple[int, ...]:
        return self.get("run.seeds")

    @property
    def problem_kind(self) -> str:
        return self.get("problem.kind")

    @property
    def uses_dataset(self) -> bool:
        return self.problem_kind in ("logistic", "mlp")

    @property
    def n_workers(self) -> int:
        return self.get("partition.workers") if self.uses_dataset else self.get("problem.workers")


def _cross_field_problems(values: Dict[str, Any]) -> List[str]:
    def get(key):
        return values.get(key, SCHEMA[key][1])

    problems = []
    for key in POSITIVE_INTS:
        if key in values and values[key] < 1:
            problems.append(f"{key} must be at least 1, got {values[key]}")

    if get("run.algorithm") == "full_precision":
        problems += [f"{k} requires run.algorithm = error_feedback"
                     for k in values if k.startswith("compressor.")]
    kind = get("compressor.kind")
    given = [k for k in ("compressor.k", "compressor.fraction") if k in values]
    if kind == "topk" and len(given) != 1:
        problems.append("compressor.kind = topk needs exactly one of compressor.k, compressor.fraction")
    if kind != "topk" and given:
        problems.append(f"{', '.join(given)} only apply to compressor.kind = topk")
    if "compressor.fraction" in values and not 0 < values["compressor.fraction"] <= 1:
        problems.append("compressor.fraction must lie in (0, 1]")

    problem_kind = get("problem.kind")
    if problem_kind == "quadratic":
        problems += [f"{k} only applies to dataset problems (logistic, mlp)" for k in values
                     if k.startswith(("dataset.", "partition.")) or k in DATASET_PROBLEM_KEYS
                     or k == "problem.hidden"]
        if get("problem.spectrum_min") < 0 or get("problem.spectrum_min") > get("problem.spectrum_max"):
            problems.append("problem.spectrum_min must lie in [0, problem.spectrum_max]")
        if get("problem.spectrum_max") <= 0:
            problems.append("problem.spectrum_max must be positive")
        if get("problem.sigma_sq") < 0 or get("problem.radius") < 0:
            problems.append("problem.sigma_sq and problem.radius must be non-negative")
    else:
        problems += [f"{k} only applies to problem.kind = quadratic" for k in values if k in QUADRATIC_KEYS]
        if problem_kind == "logistic" and "problem.hidden" in values:
            problems.append("problem.hidden only applies to problem.kind = mlp")
        if get("dataset.kind") == "idx":
            problems += [f"dataset.kind = idx needs {k}" for k in ("dataset.images", "dataset.labels")
                         if k not in values]
            problems += [f"{k} only applies to dataset.kind = blobs" for k in values
                         if k in ("dataset.per_class", "dataset.dim", "dataset.spread")]
        else:
            problems += [f"{k} only applies to dataset.kind = idx" for k in values
                         if k in ("dataset.images", "dataset.labels", "dataset.limit")]
        if not 0 <= get("dataset.test_fraction") < 1:
            problems.append("dataset.test_fraction must lie in [0, 1)")
        if get("problem.ridge") < 0:
            problems.append("problem.ridge must be non-negative")

    if get("local.kind") == "gradient":
        problems += [f"{k} only applies to local.kind = prox" for k in values
                     if k in ("local.inner_lr", "local.inner_iters", "local.tolerance")]
    else:
        if "local.T" in values:
            problems.append("local.T only applies to local.kind = gradient (prox runs one step per round)")
        if get("local.inner_lr") <= 0:
            problems.append("local.inner_lr must be positive")

    schedule_kind = get("schedule.kind")
    required = SCHEDULE_KEYS[schedule_kind]
    for key in required:
        if key not in values and key != "schedule.period":
            problems.append(f"schedule.kind = {schedule_kind} needs {key}")
    problems += [f"{k} does not apply to schedule.kind = {schedule_kind}" for k in values
                 if k.startswith("schedule.") and k != "schedule.kind" and k not in required]
    if "theory.R" in values and values["theory.R"] <= 0:
        problems.append("theory.R must be positive")
    return problems


def validate_config(values: Dict[str, Any]) -> ExperimentConfig:
    """Check already-typed values and build an ``ExperimentConfig``."""
    unknown = sorted(k for k in values if k not in SCHEMA)
    problems = [f"unknown key {k}" for k in unknown]
    known = {k: v for k, v in values.items() if k in SCHEMA}
    problems += _cross_field_problems(known)
    if problems:
        logger.error(f"Configuration rejected with {len(problems)} problem(s)")
        raise ConfigurationError("Invalid configuration", problems)
    return ExperimentConfig(values=known)


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse configuration text.

    Raises:
        ConfigurationError: Listing every problem found.
    """
    values: Dict[str, Any] = {}
    problems: List[str] = []
    section: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                problems.append(f"line {number}: empty section header")
            continue
        if "=" not in line:
            problems.append(f"line {number}: expected key = value, got {line!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if section and "." not in key:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            problems.append(f"line {number}: unknown key {key}")
            continue
        if key in values:
            problems.append(f"line {number}: duplicate key {key}")
            continue
        try:
            values[key] = SCHEMA[key][0](value)
        except ValueError as exc:
            problems.append(f"line {number}: bad value for {key}: {exc}")

    problems += _cross_field_problems(values)
    if problems:
        logger.error(f"Configuration rejected with {len(problems)} problem(s)")
        raise ConfigurationError("Invalid configuration", problems)
    return ExperimentConfig(values=values)


def load_config(path: str) -> ExperimentConfig:
    """Read and parse a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"Cannot read configuration {path}: {exc}") from exc
    logger.info(f"Loaded configuration from {path}")
    return parse_config(text)


def serialize_config(cfg: ExperimentConfig) -> str:
    """
    Canonical text form: one ``[section]`` per prefix in sorted order, keys
    sorted within a section, only explicitly set keys.
    """
    sections: Dict[str, List[Tuple[str, Any]]] = {}
    for key in sorted(cfg.values):
        section, name = key.split(".", 1)
        sections.setdefault(section, []).append((name, cfg.values[key]))
    blocks = []
    for section in sorted(sections):
        lines = [f"[{section}]"]
        lines += [f"{name} = {_format_value(value)}" for name, value in sections[section]]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
