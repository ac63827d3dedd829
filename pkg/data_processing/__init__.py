"""
Data processing module for partitioning datasets among workers and
measuring the resulting label skew.
"""

from data_processing.label_skew import label_skew_report
from data_processing.partition import Partition, PartitionMode, partition

__all__ = ["Partition", "PartitionMode", "partition", "label_skew_report"]
