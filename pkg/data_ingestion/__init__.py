"""
Data ingestion module for loading, validating and transforming labeled
datasets (IDX binary files or synthetic Gaussian blobs).
"""

from data_ingestion.data_sources import BlobsSource, DataSource, IdxSource, LabeledDataset
from data_ingestion.data_transformers import flatten_images, scale_pixels, take_first, train_test_split
from data_ingestion.idx_format import load_idx, read_idx_array
from data_ingestion.synthetic import synth_blobs
from data_ingestion.validate_data import validate_dataset

__all__ = [
    "BlobsSource",
    "DataSource",
    "IdxSource",
    "LabeledDataset",
    "flatten_images",
    "scale_pixels",
    "take_first",
    "train_test_split",
    "load_idx",
    "read_idx_array",
    "synth_blobs",
    "validate_dataset",
]
