"""
Named experiment presets.

The comparison presets run the four algorithms under the three partition
modes with multinomial logistic regression on synthetic blobs (K = 400,
batch 64, T = 30 local steps, inner prox lr 0.1, top-1% sparsifier, five
seeds). Local gradient steps use the schedule value directly
(``rescale_by_T = false``), so the bound constants see T times the schedule
value and verification reports these runs as outside the step-cap regime.

The rate presets are quadratic runs just below the FedAvg step cap for a range of
horizons K.
"""

import logging
import math
from typing import Any, Callable, Dict, List

from harness.config import ExperimentConfig, validate_config
from numerics.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

COMPARE_SEEDS = (1, 2, 3, 4, 5)
RATE_HORIZONS = (100, 400, 1600, 6400)
# Rate presets run at this fraction of the FedAvg cap; the computed L may exceed spectrum_max by rounding.
CAP_FRACTION = 0.99

ALGORITHM_VARIANTS: Dict[str, Dict[str, Any]] = {
    "fedavg": {"run.algorithm": "full_precision", "local.kind": "gradient", "local.T": 30},
    "fedprox": {"run.algorithm": "full_precision", "local.kind": "prox",
                "local.inner_lr": 0.1, "local.inner_iters": 50},
    "ef-fedavg": {"run.algorithm": "error_feedback", "local.kind": "gradient", "local.T": 30,
                  "compressor.kind": "topk", "compressor.fraction": 0.01},
    "ef-fedprox": {"run.algorithm": "error_feedback", "local.kind": "prox",
                   "local.inner_lr": 0.1, "local.inner_iters": 50,
                   "compressor.kind": "topk", "compressor.fraction": 0.01},
}
PARTITIONS = ("iid", "noniid2", "noniid1")


def _compare_base() -> Dict[str, Any]:
    return {
        "run.rounds": 400,
        "run.seeds": COMPARE_SEEDS,
        "run.rescale_by_T": False,
        "problem.kind": "logistic",
        "problem.batch_size": 64,
        "dataset.kind": "blobs",
        "partition.workers": 10,
    }


def _compare_grid(schedule: Dict[str, Any]) -> Dict[str, ExperimentConfig]:
    configs = {}
    for name, variant in ALGORITHM_VARIANTS.items():
        for mode in PARTITIONS:
            values = {**_compare_base(), **variant, **schedule, "partition.mode": mode}
            configs[f"{name}/{mode}"] = validate_config(values)
    return configs


def compare_fixed() -> Dict[str, ExperimentConfig]:
    """Fixed schedule c = 2."""
    return _compare_grid({"schedule.kind": "fixed", "schedule.c": 2.0})


def compare_diminishing() -> Dict[str, ExperimentConfig]:
    """Diminishing schedule c = 0.8, nu = 0.51."""
    return _compare_grid({"schedule.kind": "diminishing", "schedule.c": 0.8, "schedule.nu": 0.51})


def compare_stepdecay() -> Dict[str, ExperimentConfig]:
    """Step-decay schedule gamma0 = 0.8, base 2, period 50."""
    return _compare_grid({"schedule.kind": "step_decay", "schedule.gamma0": 0.8,
                         "schedule.decay_base": 2.0, "schedule.period": 50})


def _rate_base() -> Dict[str, Any]:
    return {
        "run.algorithm": "full_precision",
        "run.seeds": COMPARE_SEEDS,
        "problem.kind": "quadratic",
        "problem.workers": 10,
        "problem.dim": 20,
        "problem.spectrum_min": 0.5,
        "problem.spectrum_max": 1.0,
        "problem.sigma_sq": 0.1,
        "local.kind": "gradient",
        "local.T": 5,
    }


def rate_fixed() -> Dict[str, ExperimentConfig]:
    """Fixed schedule c = 0.99 / (sqrt(6) L): round step below the cap for every K."""
    c = CAP_FRACTION / (math.sqrt(6.0) * _rate_base()["problem.spectrum_max"])
    return {
        f"K={K}": validate_config({**_rate_base(), "run.rounds": K,
                                   "schedule.kind": "fixed", "schedule.c": c})
        for K in RATE_HORIZONS
    }


def rate_diminishing() -> Dict[str, ExperimentConfig]:
    """Diminishing schedule with nu = 0.75 starting just below the FedAvg cap."""
    c = CAP_FRACTION / (math.sqrt(6.0) * _rate_base()["problem.spectrum_max"])
    return {
        f"K={K}": validate_config({**_rate_base(), "run.rounds": K, "schedule.kind": "diminishing",
                                   "schedule.c": c, "schedule.nu": 0.75})
        for K in RATE_HORIZONS
    }


PRESETS: Dict[str, Callable[[], Dict[str, ExperimentConfig]]] = {
    "compare-fixed": compare_fixed,
    "compare-diminishing": compare_diminishing,
    "compare-stepdecay": compare_stepdecay,
    "rate-fixed": rate_fixed,
    "rate-diminishing": rate_diminishing,
}


def list_presets() -> List[str]:
    return sorted(PRESETS)


def preset_configs(name: str) -> Dict[str, ExperimentConfig]:
    """
    Expand a preset into labelled configurations.

    Raises:
        ConfigurationError: For an unknown preset name.
    """
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown preset {name!r}; available: {', '.join(list_presets())}")
    configs = PRESETS[name]()
    logger.info(f"Preset {name} expands to {len(configs)} configuration(s)")
    return configs
