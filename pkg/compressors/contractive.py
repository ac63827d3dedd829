"""
Contractive compressors.

A compressor Q is contractive with factor alpha in (0, 1] when
||Q(v) - v||^2 <= (1 - alpha) ||v||^2 for every v. All compressors here are
deterministic pure functions.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from numerics.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class CompressorSpec(ABC):
    """Abstract base class for compressors."""

    name: str = "compressor"

    @abstractmethod
    def compress(self, v: np.ndarray) -> np.ndarray:
        """Return Q(v) without modifying ``v``."""

    @abstractmethod
    def contraction(self, d: int) -> float:
        """Certified contraction factor alpha for dimension ``d``."""


@dataclass(frozen=True)
class IdentityCompressor(CompressorSpec):
    """Q(v) = v, alpha = 1."""

    name: str = "identity"

    def compress(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=np.float64)

    def contraction(self, d: int) -> float:
        return 1.0


@dataclass(frozen=True)
class TopKCompressor(CompressorSpec):
    """
    Keeps the k largest-magnitude entries and zeroes the rest; alpha = k / d.

    Ties in magnitude are broken by the lowest index.
    """

    k: int
    name: str = "topk"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"Top-K needs k >= 1, got {self.k}")

    @classmethod
    def from_fraction(cls, fraction: float, d: int) -> "TopKCompressor":
        """k = ceil(fraction * d)."""
        if not 0 < fraction <= 1:
            raise ConfigurationError(f"Top-K fraction must lie in (0, 1], got {fraction}")
        return cls(k=max(1, int(math.ceil(fraction * d - 1e-9))))

    def compress(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if self.k > v.shape[0]:
            raise ConfigurationError(f"Top-K with k={self.k} exceeds dimension {v.shape[0]}")
        if self.k == v.shape[0]:
            return v.copy()
        keep = np.argsort(-np.abs(v), kind="stable")[: self.k]
        out = np.zeros_like(v)
        out[keep] = v[keep]
        return out

    def contraction(self, d: int) -> float:
        if self.k > d:
            raise ConfigurationError(f"Top-K with k={self.k} exceeds dimension {d}")
        return self.k / d


@dataclass(frozen=True)
class ScaledSignCompressor(CompressorSpec):
    """Q(v) = (||v||_1 / d) sign(v) with sign(0) = 0; alpha = 1 / d."""

    name: str = "sign"

    def compress(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return (np.abs(v).sum() / v.shape[0]) * np.sign(v)

    def contraction(self, d: int) -> float:
        return 1.0 / d


def compress(q: CompressorSpec, v: np.ndarray) -> np.ndarray:
    """
    Apply a compressor.

    Example:
        >>> compress(TopKCompressor(k=1), np.array([3.0, -1.0, 2.0]))
        array([3., 0., 0.])
    """
    return q.compress(v)


def contraction_factor(q: CompressorSpec, d: int) -> float:
    """
    Certified alpha of ``q`` in dimension ``d``.

    Example:
        >>> contraction_factor(TopKCompressor(k=4310), 431080)
        0.01
    """
    if d < 1:
        raise ConfigurationError(f"Dimension must be positive, got {d}")
    return q.contraction(d)


def effective_contraction(q: CompressorSpec, v: np.ndarray) -> float:
    """Per-vector ratio 1 - ||Q(v) - v||^2 / ||v||^2 (1 for the zero vector)."""
    v = np.asarray(v, dtype=np.float64)
    norm_sq = float(v @ v)
    if norm_sq == 0:
        return 1.0
    residual = q.compress(v) - v
    return 1.0 - float(residual @ residual) / norm_sq
