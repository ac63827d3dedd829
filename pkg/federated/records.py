"""
Per-round metrics of one simulated run.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

CSV_COLUMNS = ["round", "gamma", "loss_gap", "grad_norm_sq", "err_norm_sq", "test_acc"]


@dataclass
class RoundTrace:
    """Raw state of one round, kept only when tracing is enabled."""

    round: int
    x: np.ndarray
    errors: List[np.ndarray]
    grad_sums: List[np.ndarray]
    round_step: float


@dataclass
class RunRecord:
    """
    Metrics of one run (one seed).

    State sequences (``loss_gaps``, ``grad_norms_sq``, ``err_norms_sq``,
    ``test_acc``, ``virtual_gaps``, ``lyapunov``) have one entry per state
    x^0..x^K; step sequences (``gammas``, ``round_steps``, ``wall_times``)
    one entry per completed round.

    ``gammas`` holds the schedule value actually applied (after clamping);
    the bound constants refer to ``step_scale`` times it. ``round_steps``
    holds the step used inside the local operator (divided by T when
    rescaling).
    """

    seed: int
    algorithm: str
    step_cap: float
    cap_mode: str = "report"
    gammas: List[float] = field(default_factory=list)
    round_steps: List[float] = field(default_factory=list)
    loss_gaps: List[float] = field(default_factory=list)
    grad_norms_sq: List[float] = field(default_factory=list)
    err_norms_sq: List[float] = field(default_factory=list)
    test_acc: List[float] = field(default_factory=list)
    virtual_gaps: List[float] = field(default_factory=list)
    lyapunov: List[float] = field(default_factory=list)
    wall_times: List[float] = field(default_factory=list)
    step_scale: float = 1.0
    cap_violations: int = 0
    clamped_rounds: int = 0
    inner_clamped_rounds: int = 0
    diverged: bool = False
    config_echo: Dict[str, str] = field(default_factory=dict)
    trace: List[RoundTrace] = field(default_factory=list)

    @property
    def rounds_completed(self) -> int:
        return len(self.gammas)

    def to_frame(self) -> pd.DataFrame:
        """One row per state x^k; ``gamma`` is NaN on the final row."""
        n_states = len(self.loss_gaps)
        gammas = list(self.gammas) + [math.nan] * (n_states - len(self.gammas))
        return pd.DataFrame(
            {
                "round": np.arange(n_states, dtype=np.int64),
                "gamma": np.array(gammas[:n_states], dtype=np.float64),
                "loss_gap": np.array(self.loss_gaps, dtype=np.float64),
                "grad_norm_sq": np.array(self.grad_norms_sq, dtype=np.float64),
                "err_norm_sq": np.array(self.err_norms_sq, dtype=np.float64),
                "test_acc": np.array(self.test_acc, dtype=np.float64),
            },
            columns=CSV_COLUMNS,
        )

    def summary(self) -> Dict[str, Any]:
        """Final and best metrics; no timing so the result is reproducible."""
        grad = np.array(self.grad_norms_sq, dtype=np.float64)
        loss = np.array(self.loss_gaps, dtype=np.float64)
        steps = grad[: self.rounds_completed] if self.rounds_completed else grad
        summary = {
            "seed": self.seed,
            "algorithm": self.algorithm,
            "rounds": self.rounds_completed,
            "diverged": self.diverged,
            "final_loss_gap": float(loss[-1]) if loss.size else None,
            "min_loss_gap": float(loss.min()) if loss.size else None,
            "final_grad_norm_sq": float(grad[-1]) if grad.size else None,
            "min_grad_norm_sq": float(steps.min()) if steps.size else None,
            "step_cap": self.step_cap,
            "cap_mode": self.cap_mode,
            "cap_violations": self.cap_violations,
            "clamped_rounds": self.clamped_rounds,
            "inner_clamped_rounds": self.inner_clamped_rounds,
            "step_scale": self.step_scale,
        }
        if self.virtual_gaps:
            summary["final_virtual_gap"] = float(self.virtual_gaps[-1])
            summary["max_lyapunov"] = float(np.max(self.lyapunov))
        acc = np.array(self.test_acc, dtype=np.float64)
        if acc.size and np.isfinite(acc).any():
            summary["final_test_acc"] = float(acc[np.isfinite(acc)][-1])
        return summary
