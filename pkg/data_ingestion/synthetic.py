"""
Synthetic Gaussian-cluster datasets used as a desk-scale MNIST substitute.
"""

import logging

import numpy as np

from data_ingestion.data_sources import LabeledDataset
from data_ingestion.validate_data import validate_dataset
from numerics.exceptions import ConfigurationError
from numerics.random_streams import RandomSource, as_generator

logger = logging.getLogger(__name__)


def synth_blobs(rng: RandomSource, n_classes: int, per_class: int, d: int,
                spread: float) -> LabeledDataset:
    """
    Gaussian clusters with distinct means, one cluster per class.

    Class means are drawn at distance about 3 from the origin in random
    directions; samples are mean + spread * N(0, I). Samples are ordered by
    class.

    Args:
        rng: Random source (fixed seed gives an identical dataset).
        n_classes: Number of classes.
        per_class: Samples per class.
        d: Feature dimension.
        spread: Per-coordinate standard deviation around each mean.

    Returns:
        A ``LabeledDataset`` with n_classes * per_class samples.

    Raises:
        ConfigurationError: If a count is not positive or spread is negative.
    """
    problems_found = [
        f"{name} must be positive, got {value}"
        for name, value in (("n_classes", n_classes), ("per_class", per_class), ("d", d))
        if value < 1
    ]
    if spread < 0:
        problems_found.append(f"spread must be non-negative, got {spread}")
    if problems_found:
        raise ConfigurationError("Invalid blob parameters", problems_found)

    gen = as_generator(rng)
    directions = gen.standard_normal((n_classes, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    means = 3.0 * directions

    labels = np.repeat(np.arange(n_classes, dtype=np.int64), per_class)
    features = means[labels]
    if spread > 0:
        features = features + spread * gen.standard_normal(features.shape)

    logger.info(f"Generated {n_classes} blobs x {per_class} samples in dimension {d}")
    return validate_dataset(features, labels, n_classes)
