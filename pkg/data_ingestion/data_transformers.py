"""
Feature transformation helpers applied while ingesting datasets.
"""

import logging
from typing import Tuple

import numpy as np

from data_ingestion.data_sources import LabeledDataset
from numerics.exceptions import ConfigurationError
from numerics.random_streams import RandomSource, as_generator

logger = logging.getLogger(__name__)


def flatten_images(images: np.ndarray) -> np.ndarray:
    """
    Flatten an (m, rows, cols, ...) image stack to (m, rows * cols * ...).

    Rows are concatenated in row-major order.
    """
    images = np.asarray(images)
    if images.ndim < 2:
        raise ConfigurationError(f"Expected at least 2 dimensions, got shape {images.shape}")
    return images.reshape(images.shape[0], -1)


def scale_pixels(raw: np.ndarray, max_value: float = 255.0) -> np.ndarray:
    """Scale raw byte intensities to float64 values in [0, 1]."""
    return np.asarray(raw, dtype=np.float64) / max_value


def take_first(dataset: LabeledDataset, limit: int) -> LabeledDataset:
    """Keep the first ``limit`` samples (used for desk-scale MNIST subsets)."""
    if limit < 1:
        raise ConfigurationError(f"limit must be positive, got {limit}")
    if limit >= len(dataset):
        return dataset
    logger.info(f"Keeping the first {limit} of {len(dataset)} samples")
    return dataset.subset(np.arange(limit))


def train_test_split(dataset: LabeledDataset, test_fraction: float,
                     rng: RandomSource) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Random train/test split.

    Args:
        dataset: Dataset to split.
        test_fraction: Fraction in [0, 1) held out for testing.
        rng: Random source for the shuffle.

    Returns:
        Tuple of (train, test); test is empty when ``test_fraction`` is 0.

    Raises:
        ConfigurationError: If ``test_fraction`` is outside [0, 1).
    """
    if not 0 <= test_fraction < 1:
        raise ConfigurationError(f"test_fraction must lie in [0, 1), got {test_fraction}")
    order = as_generator(rng).permutation(len(dataset))
    n_test = int(round(test_fraction * len(dataset)))
    test_idx = np.sort(order[:n_test])
    train_idx = np.sort(order[n_test:])
    logger.info(f"Split dataset into {len(train_idx)} train / {len(test_idx)} test samples")
    return dataset.subset(train_idx), dataset.subset(test_idx)
