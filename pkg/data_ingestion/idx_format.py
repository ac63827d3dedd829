"""
Reader for the IDX binary format used by MNIST-style datasets.

Layout: a big-endian 32-bit magic number whose low byte is the number of
dimensions, one big-endian 32-bit size per dimension, then the raw unsigned
bytes in row-major order.
"""

import logging
import os
from typing import Optional, Tuple

import numpy as np

from data_ingestion.data_sources import LabeledDataset
from data_ingestion.data_transformers import flatten_images, scale_pixels
from data_ingestion.validate_data import validate_dataset
from numerics.exceptions import IngestionError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def read_idx_array(path: str, expected_magic: int, role: str) -> np.ndarray:
    """
    Read one IDX file into a uint8 array of the declared shape.

    Args:
        path: File path.
        expected_magic: Required magic number.
        role: "images" or "labels"; used in error messages.

    Returns:
        The payload reshaped to the header dimensions.

    Raises:
        IngestionError: On a missing file, wrong magic, or truncated payload.
    """
    if not os.path.isfile(path):
        raise IngestionError(f"{role}.path", f"file not found: {path}")

    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < 4:
        raise IngestionError(f"{role}.magic", f"file too short for a header ({len(raw)} bytes)")
    magic = int(np.frombuffer(raw[:4], dtype=">u4")[0])
    if magic != expected_magic:
        raise IngestionError(
            f"{role}.magic", f"expected 0x{expected_magic:08X}, found 0x{magic:08X}"
        )

    n_dims = magic & 0xFF
    header_end = 4 + 4 * n_dims
    if len(raw) < header_end:
        raise IngestionError(f"{role}.dimensions", "header truncated before all dimension sizes")
    shape: Tuple[int, ...] = tuple(int(s) for s in np.frombuffer(raw[4:header_end], dtype=">u4"))

    expected_bytes = int(np.prod(shape))
    payload = np.frombuffer(raw[header_end:], dtype=np.uint8)
    if payload.size < expected_bytes:
        raise IngestionError(
            f"{role}.data", f"truncated: expected {expected_bytes} bytes, found {payload.size}"
        )
    if payload.size > expected_bytes:
        logger.warning(f"{path}: {payload.size - expected_bytes} trailing bytes ignored")
    return payload[:expected_bytes].reshape(shape)


def load_idx(images_path: str, labels_path: str, n_classes: Optional[int] = None) -> LabeledDataset:
    """
    Load an IDX image/label pair.

    Pixels are scaled to [0, 1] and each image is flattened row-major.

    Args:
        images_path: Image file (magic 0x00000803).
        labels_path: Label file (magic 0x00000801).
        n_classes: Class count; defaults to max label + 1.

    Returns:
        The validated ``LabeledDataset``.

    Raises:
        IngestionError: Bad magic, truncated file, or mismatched sample counts.

    Example:
        >>> ds = load_idx("train-images-idx3-ubyte", "train-labels-idx1-ubyte")
    """
    images = read_idx_array(images_path, IMAGES_MAGIC, "images")
    labels = read_idx_array(labels_path, LABELS_MAGIC, "labels")

    if images.shape[0] != labels.shape[0]:
        raise IngestionError(
            "count",
            f"image count {images.shape[0]} does not match label count {labels.shape[0]}",
        )

    features = scale_pixels(flatten_images(images))
    labels = labels.astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 1

    dataset = validate_dataset(features, labels, n_classes)
    logger.info(
        f"Loaded IDX dataset: {len(dataset)} samples of dimension {dataset.dimension}, "
        f"{n_classes} classes"
    )
    return dataset
