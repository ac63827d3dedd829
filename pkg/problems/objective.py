"""
Abstract worker objective f_i(x) = E_xi F_i(x; xi).
"""

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from numerics.exceptions import ConfigurationError
from numerics.random_streams import RandomSource, as_generator


class Objective(ABC):
    """
    A worker's private objective with full and stochastic gradient oracles.

    Subclasses provide the value, the full gradient, and a two-stage
    stochastic oracle: ``draw_sample`` picks xi, ``sample_gradient``
    evaluates grad F_i(x; xi). Keeping the stages apart lets the proximal
    operator hold one xi fixed while it iterates.

    Attributes expected on every subclass:
        dimension: Parameter count d.
        smoothness: Lipschitz constant L of the gradient.
        lower_bound: f_i^inf, a valid lower bound on the value.
        noise_bound: sigma^2 bounding E||grad F - grad f||^2.
    """

    dimension: int
    smoothness: float
    lower_bound: float
    noise_bound: float

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        """Deterministic objective value f_i(x)."""

    @abstractmethod
    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        """Exact gradient of f_i at x."""

    @abstractmethod
    def draw_sample(self, gen: np.random.Generator) -> Any:
        """Draw one xi; ``None`` means the exact (noise-free) oracle."""

    @abstractmethod
    def sample_gradient(self, x: np.ndarray, sample: Any) -> np.ndarray:
        """grad F_i(x; xi) for a sample returned by ``draw_sample``."""

    def stochastic_gradient(self, x: np.ndarray, rng: RandomSource) -> np.ndarray:
        """Unbiased gradient estimate using a fresh sample from ``rng``."""
        return self.sample_gradient(x, self.draw_sample(as_generator(rng)))

    def check_point(self, x: np.ndarray) -> np.ndarray:
        """Validate the dimension of ``x`` and return it as float64."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise ConfigurationError(
                f"Dimension mismatch: expected ({self.dimension},), got {x.shape}"
            )
        return x
