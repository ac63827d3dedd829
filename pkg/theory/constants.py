"""
Coefficients (b1, b2, b3) of the sequence inequality

    V_{k+1} <= (1 + b1 g_k^2) V_k - b2 g_k W_k + b3 g_k^2

and the step-size cap under which each federated algorithm satisfies it.
For the gradient-step algorithms g_k is the per-round ``local_step`` before
division by T; for the proximal algorithms it is the prox parameter itself.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict

from numerics.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

FEDAVG = "FedAvg"
FEDPROX = "FedProx"
EF_FEDAVG = "EF-FedAvg"
EF_FEDPROX = "EF-FedProx"
MANUAL = "manual"

PROVENANCES = (FEDAVG, FEDPROX, EF_FEDAVG, EF_FEDPROX, MANUAL)

_SQRT6 = math.sqrt(6.0)


@dataclass(frozen=True)
class BoundConstants:
    """
    Coefficients of the sequence inequality.

    Attributes:
        b1, b2, b3: Non-negative coefficients, b2 > 0.
        step_cap: Largest step for which the coefficients are valid
            (``inf`` when unconstrained).
        provenance: Algorithm the constants were derived for, or "manual".
        details: Intermediate constants, for reports only.
    """

    b1: float
    b2: float
    b3: float
    step_cap: float = math.inf
    provenance: str = MANUAL
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        problems = []
        for name in ("b1", "b3"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                problems.append(f"{name} must be finite and non-negative, got {value}")
        if not (math.isfinite(self.b2) and self.b2 > 0):
            problems.append(f"b2 must be finite and positive, got {self.b2}")
        if not self.step_cap > 0:
            problems.append(f"step_cap must be positive, got {self.step_cap}")
        if self.provenance not in PROVENANCES:
            problems.append(f"unknown provenance {self.provenance!r}")
        if problems:
            raise ConfigurationError("Invalid bound constants", problems)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "provenance": self.provenance,
            "b1": self.b1,
            "b2": self.b2,
            "b3": self.b3,
            "step_cap": self.step_cap,
            "details": dict(self.details),
        }


def _compression_factor(contraction: float) -> float:
    """(1 - alpha)(1 + 2/alpha), zero for a lossless compressor."""
    return (1.0 - contraction) * (1.0 + 2.0 / contraction)


def _fedavg(L: float, T: int, sigma_sq: float, delta: float) -> BoundConstants:
    b1 = _SQRT6 * L**2 * T
    b3 = b1 * delta + L * (1.0 + (3.0 / _SQRT6) * T) * sigma_sq
    return BoundConstants(b1, 0.5, b3, 1.0 / (_SQRT6 * L), FEDAVG)


def _fedprox(L: float, sigma_sq: float, delta: float) -> BoundConstants:
    b1 = _SQRT6 * L**2
    b3 = b1 * delta + L * (1.0 + 3.0 / _SQRT6) * sigma_sq
    return BoundConstants(b1, 0.5, b3, 1.0 / (_SQRT6 * L), FEDPROX)


def _ef_fedavg(L: float, sigma_sq: float, delta: float, contraction: float) -> BoundConstants:
    factor = _compression_factor(contraction)
    root = math.inf if factor == 0 else math.sqrt(3.0 * contraction / (64.0 * factor))
    alpha_hat = min(1.0 / 6.0, root) / L
    A = 4.0 * (1.0 + 1.5 * L) * L**2 * alpha_hat / contraction
    C2 = 16.0 * factor * A / 3.0 + 1.5 * L
    C3 = 14.0 * factor * A / 3.0 + 13.0 * L / 8.0
    b1 = 2.0 * L * C2
    b3 = b1 * delta + C3 * sigma_sq
    details = {"alpha_hat": alpha_hat, "A": A, "C2_tilde": C2, "C3_tilde": C3}
    return BoundConstants(b1, 0.25, b3, alpha_hat, EF_FEDAVG, details)


def _ef_fedprox(L: float, sigma_sq: float, delta: float, contraction: float) -> BoundConstants:
    factor = _compression_factor(contraction)
    C1 = factor * (4.0 + 4.0 * L**2 / 3.0)
    C2 = factor * (4.0 + 4.0 / 3.0)
    C3 = factor * (4.0 + 2.0 / 3.0)
    root = math.inf if C1 == 0 else 0.5 * math.sqrt(contraction / C1)
    gamma_bar = min(1.0 / (6.0 * L), root)
    A = 3.0 * L**2 * gamma_bar / contraction
    b1 = 2.0 * L * (1.5 * L + A * C2)
    b3 = b1 * delta + (9.0 * L / 4.0 + A * C3) * sigma_sq
    details = {"gamma_bar": gamma_bar, "A": A, "C1": C1, "C2": C2, "C3": C3}
    return BoundConstants(b1, 0.25, b3, gamma_bar, EF_FEDPROX, details)


def algorithm_constants(
    algorithm: str,
    L: float,
    T: int = 1,
    sigma_sq: float = 0.0,
    delta: float = 0.0,
    contraction: float = 1.0,
) -> BoundConstants:
    """
    Constants of the sequence inequality for one federated algorithm.

    Args:
        algorithm: One of "FedAvg", "FedProx", "EF-FedAvg", "EF-FedProx".
        L: Smoothness constant, > 0.
        T: Local steps per round (used by FedAvg only).
        sigma_sq: Gradient noise bound.
        delta: Heterogeneity gap Delta^inf >= 0.
        contraction: Compressor factor alpha in (0, 1] (error-feedback only).

    Returns:
        ``BoundConstants`` with the step cap and, for the error-feedback
        algorithms, the intermediate constants in ``details``.

    Raises:
        ConfigurationError: On out-of-range inputs.

    Example:
        >>> bc = algorithm_constants("FedProx", L=1.0)
        >>> round(bc.b1, 6), bc.b2, round(bc.step_cap, 6)
        (2.44949, 0.5, 0.408248)
    """
    problems = []
    if algorithm not in (FEDAVG, FEDPROX, EF_FEDAVG, EF_FEDPROX):
        problems.append(f"unknown algorithm {algorithm!r}")
    if not L > 0:
        problems.append(f"L must be positive, got {L}")
    if T < 1:
        problems.append(f"T must be at least 1, got {T}")
    if sigma_sq < 0:
        problems.append(f"sigma_sq must be non-negative, got {sigma_sq}")
    if delta < 0:
        problems.append(f"delta must be non-negative, got {delta}")
    if algorithm in (EF_FEDAVG, EF_FEDPROX) and not 0 < contraction <= 1:
        problems.append(f"contraction must lie in (0, 1], got {contraction}")
    if problems:
        raise ConfigurationError("Cannot compute algorithm constants", problems)

    if algorithm == FEDAVG:
        bc = _fedavg(L, T, sigma_sq, delta)
    elif algorithm == FEDPROX:
        bc = _fedprox(L, sigma_sq, delta)
    elif algorithm == EF_FEDAVG:
        bc = _ef_fedavg(L, sigma_sq, delta, contraction)
    else:
        bc = _ef_fedprox(L, sigma_sq, delta, contraction)
    logger.debug(f"{algorithm} constants: b1={bc.b1:.6g} b2={bc.b2} b3={bc.b3:.6g} cap={bc.step_cap:.6g}")
    return bc


def lyapunov_error_weight(algorithm: str, L: float, step: float, contraction: float, n: int) -> float:
    """
    Weight w such that V_k = f(z^k) - f^inf + w * sum_i ||e_i^k||^2 for the
    error-feedback algorithms; 0 for the full-precision ones.
    """
    if algorithm == EF_FEDAVG:
        return 4.0 * (1.0 + 1.5 * L) * L**2 * step / (contraction * n)
    if algorithm == EF_FEDPROX:
        return 3.0 * L**2 * step / (contraction * n)
    return 0.0
