"""
Experiment harness: configuration, builders, multi-seed runs, persistence,
presets and the ``fedbound`` command line.
"""

from harness.builders import (
    ProblemInstance,
    build_compressor,
    build_constants,
    build_dataset,
    build_local,
    build_problem,
    build_schedule,
    build_setup,
    build_split,
)
from harness.config import ExperimentConfig, load_config, parse_config, serialize_config, validate_config
from harness.experiment import ExperimentResult, aggregate_records, run_experiment
from harness.persistence import read_record_csv, write_experiment, write_record_csv
from harness.presets import list_presets, preset_configs

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "ProblemInstance",
    "aggregate_records",
    "build_compressor",
    "build_constants",
    "build_dataset",
    "build_local",
    "build_problem",
    "build_schedule",
    "build_setup",
    "build_split",
    "list_presets",
    "load_config",
    "parse_config",
    "preset_configs",
    "read_record_csv",
    "run_experiment",
    "serialize_config",
    "validate_config",
    "write_experiment",
    "write_record_csv",
]
