"""
Federated round engine and run records.
"""

from federated.engine import (
    CAP_MODES,
    ServerState,
    SimulationSetup,
    WorkerState,
    algorithm_tag,
    run_error_feedback,
    run_full_precision,
    step_cap,
    virtual_iterate,
)
from federated.records import CSV_COLUMNS, RoundTrace, RunRecord

__all__ = [
    "CAP_MODES",
    "CSV_COLUMNS",
    "RoundTrace",
    "RunRecord",
    "ServerState",
    "SimulationSetup",
    "WorkerState",
    "algorithm_tag",
    "run_error_feedback",
    "run_full_precision",
    "step_cap",
    "virtual_iterate",
]
