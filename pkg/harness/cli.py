"""
Command-line interface.

Subcommands:
    run <config> | --preset NAME   simulate every seed and write outputs
    bounds <config>                constants and bounds, no simulation
    verify <config>                run, then check the matching bound
    oracle --trials N              bound soundness fuzz on random sequences
    partition-report <config>      per-worker class histograms
    presets                        list preset names

Exit codes: 0 success, 2 configuration or ingestion error, 3 every seed
diverged, 4 bound violated beyond error bars (verify and oracle).
"""

import argparse
import io
import logging
import os
import re
import sys
from typing import Dict, List, Optional

import pandas as pd

from data_processing.label_skew import label_skew_report
from harness.builders import build_constants, build_local, build_problem, build_schedule, build_split
from harness.config import ExperimentConfig, load_config
from harness.experiment import ExperimentResult, run_experiment
from harness.persistence import dumps_json, resolve_output_dir, resolve_threads, write_experiment
from harness.presets import list_presets, preset_configs
from numerics.exceptions import ConfigurationError, IngestionError
from problems.aggregate import global_value
from localops.operators import step_scale
from schedules.step_sizes import StepDecaySchedule, scale_schedule, step_size
from theory.bounds import iteration_complexity, theorem_bound
from theory.recursion import SCHEDULE_KINDS, soundness_sweep, step_sum_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VIOLATION = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="run a single seed instead of run.seeds")
    common.add_argument("--out", help="output directory (default: run.out, $FEDBOUND_OUT, results)")
    common.add_argument("--threads", type=int, help="worker threads per round")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="format of reports printed to stdout")
    common.add_argument("--log-level", default="INFO",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="logging level")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="fedbound", description="Federated optimization simulator and bound checker")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="simulate and write per-seed and aggregate CSVs")
    run.add_argument("config", nargs="?", help="configuration file")
    run.add_argument("--preset", help="run a named preset instead of a configuration file")

    for name, text in (("bounds", "print constants and bounds without simulating"),
                       ("verify", "simulate and check the bound"),
                       ("partition-report", "print per-worker class histograms")):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("config", help="configuration file")

    oracle = sub.add_parser("oracle", parents=[common], help="bound soundness fuzz")
    oracle.add_argument("--trials", type=int, default=1000, help="instances per schedule kind")
    oracle.add_argument("--kind", choices=SCHEDULE_KINDS + ("all",), default="all")

    sub.add_parser("presets", parents=[common], help="list preset names")
    return parser


def _configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr, force=True)


def _with_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.seed is not None:
        cfg = cfg.replace(run__seeds=(args.seed,))
    return cfg


def _emit(payload: Dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(dumps_json(payload))
        return
    frame = pd.DataFrame({"key": list(payload.keys()), "value": list(payload.values())})
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    out.write(buffer.getvalue())


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", label)


def _run_one(cfg: ExperimentConfig, args: argparse.Namespace, out_dir: str) -> ExperimentResult:
    result = run_experiment(cfg, threads=resolve_threads(args.threads, cfg))
    write_experiment(result, out_dir)
    return result


def cmd_run(args: argparse.Namespace) -> int:
    if bool(args.config) == bool(args.preset):
        raise ConfigurationError("run needs exactly one of a configuration file or --preset")
    if args.config:
        cfg = _with_overrides(load_config(args.config), args)
        result = _run_one(cfg, args, resolve_output_dir(args.out, cfg))
        return EXIT_DIVERGED if result.all_diverged else EXIT_OK

    base = resolve_output_dir(args.out)
    diverged = []
    for label, cfg in preset_configs(args.preset).items():
        cfg = _with_overrides(cfg, args)
        result = _run_one(cfg, args, os.path.join(base, args.preset, _slug(label)))
        if result.all_diverged:
            diverged.append(label)
    if diverged:
        logger.error(f"Every seed diverged for {diverged}")
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    instance = build_problem(cfg)
    bc = build_constants(cfg, instance)
    scale = step_scale(build_local(cfg), cfg.get("run.rescale_by_T"))
    schedule = scale_schedule(build_schedule(cfg), scale)
    V0 = max(global_value(instance.objectives, instance.x0) - instance.f_inf, 0.0)
    report = {
        "algorithm": bc.provenance,
        "L": instance.smoothness,
        "sigma_sq": instance.sigma_sq,
        "delta_inf": instance.delta,
        "b1": bc.b1,
        "b2": bc.b2,
        "b3": bc.b3,
        "step_cap": bc.step_cap,
        "step_scale": scale,
        "first_step": step_size(schedule, 0),
    }
    report["in_regime"] = report["first_step"] <= bc.step_cap
    report.update({f"detail.{k}": v for k, v in bc.details.items()})
    report["V0"] = V0
    R = cfg.get("theory.R")
    if isinstance(schedule, StepDecaySchedule) and R is None:
        report["bound"] = None
        report["note"] = "set theory.R to evaluate the step-decay bound"
    else:
        try:
            report["bound"] = theorem_bound(bc, schedule, V0, cfg.rounds, R)
            report["rounds_for_half_bound"] = iteration_complexity(bc, V0, report["bound"] / 2, schedule, R)
        except ConfigurationError as exc:
            report["bound"] = None
            report["note"] = str(exc)
    _emit(report, args.format)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    result = _run_one(cfg, args, resolve_output_dir(args.out, cfg))
    if result.all_diverged:
        return EXIT_DIVERGED
    verdict = result.verdict.to_dict() if result.verdict else {"theorem": None, "notes": result.notes}
    _emit(verdict, "json" if args.format == "json" else "csv")
    if result.verdict is not None and result.verdict.violated:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    kinds: List[str] = list(SCHEDULE_KINDS) if args.kind == "all" else [args.kind]
    seed = args.seed if args.seed is not None else 0
    report = {}
    violations = 0
    for kind in kinds:
        sweep = soundness_sweep(args.trials, kind, seed)
        report[f"{kind}.violations"] = sweep.violations
        report[f"{kind}.worst_ratio"] = sweep.worst_ratio
        violations += sweep.violations
    for name, count in step_sum_sweep(10 * args.trials, seed).items():
        report[f"{name}.violations"] = count
        violations += count
    report["trials"] = args.trials
    _emit(report, args.format)
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_partition_report(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if not cfg.uses_dataset:
        raise ConfigurationError("partition-report needs a dataset problem (logistic or mlp)")
    train, _, part = build_split(cfg)
    report = label_skew_report(train, part)
    table = report["histogram"].copy()
    table["label_cardinality"] = report["label_cardinality"]
    table["total_variation"] = report["total_variation"]
    table["chi_square"] = report["chi_square"]
    if args.format == "json":
        payload = {
            "mode": part.mode.value,
            "dropped": report["dropped"],
            "has_skew": report["has_skew"],
            "message": report["message"],
            "workers": table.reset_index().to_dict(orient="records"),
        }
        sys.stdout.write(dumps_json(payload))
    else:
        sys.stdout.write(table.to_csv(float_format="%.6g", lineterminator="\n"))
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    for name in list_presets():
        sys.stdout.write(f"{name}\n")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "partition-report": cmd_partition_report,
    "presets": cmd_presets,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, IngestionError) as exc:
        logger.error(str(exc))
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
