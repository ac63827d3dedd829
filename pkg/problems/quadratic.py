"""
Quadratic worker objectives f_i(x) = 1/2 x'A_i x - b_i'x + c_i with additive
Gaussian gradient noise.

Quadratics are the main verification vehicle: the minimizer, the smoothness
constant, every infimum and the heterogeneity gap are available in closed
form.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from numerics.exceptions import ConfigurationError
from numerics.random_streams import Purpose, RngStream, gaussian_vector
from problems.objective import Objective

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadraticProblem(Objective):
    """
    One worker's quadratic objective.

    Attributes:
        A: Symmetric positive-semidefinite d x d matrix.
        b: Linear term.
        c: Constant term.
        noise_bound: sigma^2; stochastic gradients add a Gaussian vector with
            E||noise||^2 = sigma^2.
    """

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0
    noise_bound: float = 0.0
    dimension: int = field(init=False)
    smoothness: float = field(init=False)
    lower_bound: float = field(init=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise ConfigurationError(
                f"Quadratic shapes inconsistent: A {A.shape}, b {b.shape}"
            )
        if not np.allclose(A, A.T, atol=1e-12):
            raise ConfigurationError("Quadratic matrix A must be symmetric")
        A = 0.5 * (A + A.T)
        eigvals = np.linalg.eigvalsh(A)
        if eigvals[0] < -1e-10 * max(1.0, abs(eigvals[-1])):
            raise ConfigurationError(
                f"Quadratic matrix A must be positive semidefinite (min eigenvalue {eigvals[0]:.3e})"
            )
        if self.noise_bound < 0:
            raise ConfigurationError(f"noise_bound must be non-negative, got {self.noise_bound}")

        pinv = np.linalg.pinv(A, hermitian=True)
        if not np.allclose(A @ (pinv @ b), b, atol=1e-9 * max(1.0, np.linalg.norm(b))):
            raise ConfigurationError("b is not in the range of A; the quadratic is unbounded below")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "noise_bound", float(self.noise_bound))
        object.__setattr__(self, "dimension", int(b.shape[0]))
        object.__setattr__(self, "smoothness", float(max(eigvals[-1], 0.0)))
        object.__setattr__(self, "lower_bound", float(self.c - 0.5 * b @ pinv @ b))

    def value(self, x: np.ndarray) -> float:
        x = self.check_point(x)
        return float(0.5 * x @ self.A @ x - self.b @ x + self.c)

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        x = self.check_point(x)
        return self.A @ x - self.b

    def draw_sample(self, gen: np.random.Generator) -> Optional[np.ndarray]:
        if self.noise_bound == 0:
            return None
        return gaussian_vector(gen, self.dimension, float(np.sqrt(self.noise_bound)))

    def sample_gradient(self, x: np.ndarray, sample: Optional[np.ndarray]) -> np.ndarray:
        grad = self.full_gradient(x)
        if sample is None:
            return grad
        return grad + sample

    def minimizer(self) -> np.ndarray:
        """A minimizer of f_i (minimum-norm when A is singular)."""
        return np.linalg.pinv(self.A, hermitian=True) @ self.b

    def exact_prox(self, x: np.ndarray, gamma: float, sample: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Closed-form prox of F_i(.; xi) with parameter gamma.

        Solves (A + I/gamma) y = b - xi + x/gamma, the minimizer of
        F_i(y; xi) + ||y - x||^2 / (2 gamma) where F_i(y; xi) = f_i(y) + xi'y.
        """
        x = self.check_point(x)
        if gamma <= 0:
            raise ConfigurationError(f"Prox parameter must be positive, got {gamma}")
        rhs = self.b + x / gamma
        if sample is not None:
            rhs = rhs - sample
        return np.linalg.solve(self.A + np.eye(self.dimension) / gamma, rhs)


def make_heterogeneous_quadratics(
    n: int,
    d: int,
    spectrum_min: float = 0.1,
    spectrum_max: float = 1.0,
    radius: float = 1.0,
    sigma_sq: float = 0.0,
    seed: int = 0,
) -> List[QuadraticProblem]:
    """
    Build n worker quadratics whose minimizers sit on a sphere of radius rho.

    All workers share one random rotation; each worker draws its own spectrum
    in [spectrum_min, spectrum_max] with the top eigenvalue pinned to
    ``spectrum_max`` so every worker has smoothness exactly L = spectrum_max.
    With ``radius`` 0 all minimizers coincide at the origin and the
    heterogeneity gap is zero.

    Args:
        n: Worker count.
        d: Dimension.
        spectrum_min: Smallest eigenvalue bound (>= 0).
        spectrum_max: Largest eigenvalue, the smoothness constant L.
        radius: Distance of each worker minimizer from the origin.
        sigma_sq: Gradient-noise bound sigma^2 for every worker.
        seed: Master seed.

    Returns:
        List of ``QuadraticProblem`` of length n.

    Raises:
        ConfigurationError: On non-positive counts or an invalid spectrum.
    """
    problems_found = []
    if n < 1:
        problems_found.append(f"worker count must be positive, got {n}")
    if d < 1:
        problems_found.append(f"dimension must be positive, got {d}")
    if not 0 <= spectrum_min <= spectrum_max or spectrum_max <= 0:
        problems_found.append(
            f"spectrum must satisfy 0 <= min <= max, max > 0 (got [{spectrum_min}, {spectrum_max}])"
        )
    if radius < 0:
        problems_found.append(f"radius must be non-negative, got {radius}")
    if sigma_sq < 0:
        problems_found.append(f"sigma_sq must be non-negative, got {sigma_sq}")
    if problems_found:
        raise ConfigurationError("Invalid quadratic problem parameters", problems_found)

    gen = RngStream(seed, purpose=Purpose.INIT).generator()
    rotation, _ = np.linalg.qr(gen.standard_normal((d, d)))

    workers = []
    for i in range(n):
        eigvals = gen.uniform(spectrum_min, spectrum_max, size=d)
        eigvals[0] = spectrum_max
        A = (rotation * eigvals) @ rotation.T
        A = 0.5 * (A + A.T)
        direction = gen.standard_normal(d)
        direction /= np.linalg.norm(direction)
        target = radius * direction
        workers.append(QuadraticProblem(A=A, b=A @ target, c=0.0, noise_bound=sigma_sq))

    logger.info(
        f"Built {n} quadratic workers: d={d}, spectrum=[{spectrum_min}, {spectrum_max}], "
        f"radius={radius}, sigma_sq={sigma_sq}"
    )
    return workers
