"""
Labeled dataset container and the sources that produce one.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    Feature matrix with integer class labels.

    Attributes:
        features: (m, p) float64 array, one sample per row.
        labels: (m,) int64 array with values in [0, n_classes).
        n_classes: Class count C.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices) -> "LabeledDataset":
        """Rows selected by ``indices``, keeping the class count."""
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[indices], self.labels[indices], self.n_classes)


class DataSource(ABC):
    """Abstract base class for data sources."""

    @abstractmethod
    def extract_data(self) -> LabeledDataset:
        """Extracts data from the source."""


class IdxSource(DataSource):
    """Reads an image/label pair of IDX files (MNIST layout).

    Args:
        images_path: Path of the image file (magic 0x00000803).
        labels_path: Path of the label file (magic 0x00000801).
        n_classes: Class count; inferred from the labels when omitted.
        limit: Keep only the first ``limit`` samples.
    """

    def __init__(self, images_path: str, labels_path: str,
                 n_classes: Optional[int] = None, limit: Optional[int] = None):
        self.images_path = images_path
        self.labels_path = labels_path
        self.n_classes = n_classes
        self.limit = limit

    def extract_data(self) -> LabeledDataset:
        from data_ingestion.data_transformers import take_first
        from data_ingestion.idx_format import load_idx

        dataset = load_idx(self.images_path, self.labels_path, n_classes=self.n_classes)
        if self.limit is not None:
            dataset = take_first(dataset, self.limit)
        return dataset


class BlobsSource(DataSource):
    """Generates Gaussian class clusters (see ``synth_blobs``)."""

    def __init__(self, seed: int, n_classes: int, per_class: int, dim: int, spread: float):
        self.seed = seed
        self.n_classes = n_classes
        self.per_class = per_class
        self.dim = dim
        self.spread = spread

    def extract_data(self) -> LabeledDataset:
        from data_ingestion.synthetic import synth_blobs
        from numerics.random_streams import Purpose, RngStream

        return synth_blobs(
            RngStream(self.seed, purpose=Purpose.DATASET),
            self.n_classes, self.per_class, self.dim, self.spread,
        )
