"""
Writing experiment outputs: per-seed CSVs, the aggregate CSV, a JSON
summary and the canonical configuration echo.
"""

import json
import logging
import math
import os
from typing import Any, Dict, Optional

import pandas as pd

from federated.records import CSV_COLUMNS, RunRecord
from harness.config import ExperimentConfig, serialize_config

logger = logging.getLogger(__name__)

OUT_ENV = "FEDBOUND_OUT"
THREADS_ENV = "FEDBOUND_THREADS"
FLOAT_FORMAT = "%.17g"


def resolve_output_dir(out: Optional[str] = None, cfg: Optional[ExperimentConfig] = None) -> str:
    """
    Output directory: ``out`` if given, else ``run.out`` when set in the
    config, else the ``FEDBOUND_OUT`` environment variable, else "results".
    """
    if out:
        return out
    if cfg is not None and cfg.is_set("run.out"):
        return cfg.get("run.out")
    return os.getenv(OUT_ENV) or "results"


def resolve_threads(threads: Optional[int] = None, cfg: Optional[ExperimentConfig] = None) -> int:
    """Thread count from the flag, ``run.threads``, ``FEDBOUND_THREADS`` or 1."""
    if threads:
        return threads
    if cfg is not None and cfg.is_set("run.threads"):
        return cfg.get("run.threads")
    env = os.getenv(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return 1


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def dumps_json(payload: Dict[str, Any]) -> str:
    """Deterministic JSON: sorted keys, non-finite floats as null."""
    return json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n"


def write_frame(frame: pd.DataFrame, path: str) -> str:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    return path


def write_record_csv(record: RunRecord, path: str) -> str:
    """One row per round with the columns of ``CSV_COLUMNS``."""
    return write_frame(record.to_frame()[CSV_COLUMNS], path)


def read_record_csv(path: str) -> pd.DataFrame:
    """Read a per-seed CSV back; empty cells become NaN."""
    frame = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} lacks columns {missing}")
    return frame


def write_experiment(result, out_dir: str) -> Dict[str, str]:
    """
    Write all outputs of an ``ExperimentResult`` under ``out_dir``.

    Layout: ``seed_<s>.csv`` per completed seed, ``seed_<s>_partial.csv``
    per diverged seed, ``aggregate.csv``, ``summary.json``, ``config.txt``.

    Returns:
        Mapping from artifact name to path.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths: Dict[str, str] = {}
    for record in result.records:
        paths[f"seed_{record.seed}"] = write_record_csv(record, os.path.join(out_dir, f"seed_{record.seed}.csv"))
    for record in result.failed:
        paths[f"seed_{record.seed}_partial"] = write_record_csv(
            record, os.path.join(out_dir, f"seed_{record.seed}_partial.csv")
        )
    if result.aggregate is not None:
        paths["aggregate"] = write_frame(result.aggregate, os.path.join(out_dir, "aggregate.csv"))

    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(result.summary()))
    paths["summary"] = summary_path

    config_path = os.path.join(out_dir, "config.txt")
    with open(config_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_config(result.config))
    paths["config"] = config_path

    logger.info(f"Wrote {len(paths)} artifacts to {out_dir}")
    return paths
