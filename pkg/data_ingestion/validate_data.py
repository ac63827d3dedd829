"""
Data validation module for ensuring dataset integrity before training.
"""

import logging

import numpy as np
import pandas as pd

from data_ingestion.data_sources import LabeledDataset
from numerics.exceptions import IngestionError

logger = logging.getLogger(__name__)


def validate_dataset(features: np.ndarray, labels: np.ndarray, n_classes: int) -> LabeledDataset:
    """
    Validate raw arrays and wrap them in a ``LabeledDataset``.

    Performs:
    - Shape checks (2-D features, one label per row)
    - Finiteness check on every feature
    - Label range check against ``n_classes``
    - Class histogram (logged), with a warning for empty classes

    Args:
        features: (m, p) feature matrix.
        labels: (m,) integer labels.
        n_classes: Declared class count.

    Returns:
        A dataset holding read-only float64 / int64 copies.

    Raises:
        IngestionError: Naming the offending field when a check fails.
    """
    features = np.array(features, dtype=np.float64)
    labels = np.array(labels)

    if features.ndim != 2:
        raise IngestionError("features", f"expected a 2-D matrix, got shape {features.shape}")
    if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
        raise IngestionError(
            "labels", f"expected {features.shape[0]} labels, got shape {labels.shape}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise IngestionError("labels", f"labels must be integers, got dtype {labels.dtype}")
    if n_classes < 1:
        raise IngestionError("n_classes", f"must be positive, got {n_classes}")
    if not np.all(np.isfinite(features)):
        raise IngestionError("features", "NaN or Inf values found")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise IngestionError(
            "labels", f"values must lie in [0, {n_classes}), found [{labels.min()}, {labels.max()}]"
        )

    labels = labels.astype(np.int64)
    counts = pd.Series(labels).value_counts().sort_index()
    histogram = {int(c): int(n) for c, n in counts.items()}
    logger.info(f"Class histogram: {histogram}")
    missing = n_classes - len(counts)
    if missing > 0:
        logger.warning(f"{missing} of {n_classes} classes have no samples")

    features.setflags(write=False)
    labels.setflags(write=False)
    logger.info(f"Successfully validated dataset with {len(labels)} samples and {features.shape[1]} features")
    return LabeledDataset(features, labels, int(n_classes))
