"""
Seeded random streams.

Every random draw in a simulation comes from a stream identified by
``(seed, worker, round, purpose)``. The identifier is mixed into a numpy
``SeedSequence`` and fed to the counter-based ``Philox`` bit generator, so a
worker's draws never depend on which thread ran first or on how many other
streams were consumed.

Noise convention: ``sigma`` bounds the expected squared norm of the whole
noise vector, E||noise||^2 = sigma^2. The per-coordinate variance is
therefore sigma^2 / d, not sigma^2.
"""

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Union

import numpy as np

from numerics.exceptions import ConfigurationError


class Purpose(IntEnum):
    """Tags separating independent uses of randomness."""

    GRADIENT = 1
    PROX = 2
    MINIBATCH = 3
    INIT = 4
    PARTITION = 5
    DATASET = 6
    ESTIMATE = 7
    ORACLE = 8


@dataclass(frozen=True)
class RngStream:
    """
    Identifier of one reproducible random stream.

    Two streams with equal fields always produce the same sequence; streams
    differing in any field are statistically independent.

    Attributes:
        seed: Master seed (64-bit unsigned).
        worker: Worker index, 0 for streams not tied to a worker.
        round: Round index, 0 for streams not tied to a round.
        purpose: What the draws are used for.
    """

    seed: int
    worker: int = 0
    round: int = 0
    purpose: Purpose = Purpose.GRADIENT

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.worker < 0 or self.round < 0:
            raise ConfigurationError("Stream worker and round indices must be non-negative")

    def derive(self, **changes) -> "RngStream":
        """Return a stream with some identifier fields replaced."""
        return replace(self, **changes)

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        sequence = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(int(self.worker), int(self.round), int(self.purpose)),
        )
        return np.random.Generator(np.random.Philox(sequence))


RandomSource = Union[RngStream, np.random.Generator]


def as_generator(rng: RandomSource) -> np.random.Generator:
    """Accept either a stream identifier or an already-open generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"Expected RngStream or numpy Generator, got {type(rng).__name__}")


def gaussian_vector(rng: RandomSource, d: int, sigma: float) -> np.ndarray:
    """
    Draw a zero-mean Gaussian vector with E||v||^2 = sigma^2.

    Args:
        rng: Stream identifier or open generator.
        d: Dimension.
        sigma: Non-negative noise level (vector-level, see module docstring).

    Returns:
        A float64 vector of length ``d``; the zero vector when ``sigma`` is 0.

    Raises:
        ConfigurationError: If ``sigma`` is negative or ``d`` is not positive.
    """
    if sigma < 0:
        raise ConfigurationError(f"sigma must be non-negative, got {sigma}")
    if d < 1:
        raise ConfigurationError(f"Dimension must be positive, got {d}")
    if sigma == 0:
        return np.zeros(d, dtype=np.float64)
    gen = as_generator(rng)
    return gen.standard_normal(d) * (sigma / np.sqrt(d))
