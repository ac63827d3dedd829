"""
Label-skew assessment for worker partitions.

This module summarizes how far each worker's class distribution is from the
global one: per-worker class histograms, label cardinality, total variation
distance and a chi-square statistic.
"""

import logging
from typing import Any, Dict

import numpy as np
import pandas as pd

from data_ingestion.data_sources import LabeledDataset
from data_processing.partition import Partition

logger = logging.getLogger(__name__)


def label_skew_report(
    dataset: LabeledDataset,
    part: Partition,
    threshold: float = 0.2,
) -> Dict[str, Any]:
    """
    Check a partition for label skew.

    Args:
        dataset: The partitioned dataset.
        part: Partition to analyze.
        threshold: Total variation distance above which a worker counts as
            skewed (default: 0.2).

    Returns:
        Dictionary containing:
        - histogram: DataFrame of class counts, one row per worker
        - label_cardinality: number of distinct classes per worker
        - total_variation: per-worker distance to the global class mix
        - chi_square: per-worker chi-square statistic against the global mix
        - has_skew: True if any worker exceeds ``threshold``
        - message: Human-readable summary

    Example:
        >>> report = label_skew_report(ds, partition(ds, 10, "noniid2", rng))
        >>> report["label_cardinality"].max()
        2
    """
    columns = [f"class_{c}" for c in range(dataset.n_classes)]
    rows = []
    for worker, indices in enumerate(part.assignment):
        counts = np.bincount(dataset.labels[indices], minlength=dataset.n_classes)
        rows.append(counts)
    histogram = pd.DataFrame(rows, columns=columns)
    histogram.index.name = "worker"

    global_share = np.bincount(dataset.labels, minlength=dataset.n_classes) / max(len(dataset), 1)
    sizes = histogram.sum(axis=1).to_numpy(dtype=np.float64)
    shares = histogram.to_numpy(dtype=np.float64) / np.maximum(sizes[:, None], 1.0)

    total_variation = pd.Series(0.5 * np.abs(shares - global_share).sum(axis=1),
                                index=histogram.index, name="total_variation")
    expected = sizes[:, None] * global_share
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (histogram.to_numpy() - expected) ** 2 / expected, 0.0)
    chi_square = pd.Series(terms.sum(axis=1), index=histogram.index, name="chi_square")
    cardinality = (histogram > 0).sum(axis=1).rename("label_cardinality")

    has_skew = bool((total_variation > threshold).any())
    if has_skew:
        message = (
            f"Label skew detected: max total variation {total_variation.max():.3f} "
            f"(threshold: {threshold}), max classes per worker {cardinality.max()}"
        )
    else:
        message = f"No significant label skew. Max total variation: {total_variation.max():.3f}"

    logger.info(f"Label skew check completed: {message}")
    return {
        "histogram": histogram,
        "label_cardinality": cardinality,
        "total_variation": total_variation,
        "chi_square": chi_square,
        "has_skew": has_skew,
        "dropped": part.dropped,
        "message": message,
    }
