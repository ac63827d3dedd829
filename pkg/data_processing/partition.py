"""
Data-similarity partitioners: IID shards, two-classes-per-worker chunks
(Non-IID2) and one-class-per-worker splits (Non-IID1).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from data_ingestion.data_sources import LabeledDataset
from numerics.exceptions import ConfigurationError
from numerics.random_streams import RandomSource, as_generator

logger = logging.getLogger(__name__)


class PartitionMode(str, Enum):
    IID = "iid"
    NON_IID2 = "noniid2"
    NON_IID1 = "noniid1"

    @classmethod
    def parse(cls, value: str) -> "PartitionMode":
        normalized = str(value).strip().lower().replace("-", "").replace("_", "")
        for mode in cls:
            if mode.value == normalized:
                return mode
        raise ConfigurationError(
            f"Unknown partition mode '{value}'. Choose from: iid, noniid2, noniid1"
        )


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Disjoint per-worker index lists into a dataset.

    Attributes:
        assignment: One sorted int64 index array per worker.
        mode: How the partition was built.
        dropped: Number of samples assigned to no worker.
    """

    assignment: Tuple[np.ndarray, ...]
    mode: PartitionMode
    dropped: int = 0

    @property
    def n_workers(self) -> int:
        return len(self.assignment)

    def sizes(self) -> List[int]:
        return [int(idx.shape[0]) for idx in self.assignment]


def _iid(labels: np.ndarray, n: int, gen: np.random.Generator) -> List[np.ndarray]:
    m = labels.shape[0]
    shard = m // n
    if shard == 0:
        raise ConfigurationError(f"Cannot split {m} samples into {n} non-empty IID shards")
    order = gen.permutation(m)
    return [order[i * shard:(i + 1) * shard] for i in range(n)]


def _class_members(labels: np.ndarray, n_classes: int) -> List[np.ndarray]:
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    return [order[sorted_labels == c] for c in range(n_classes)]


def _non_iid2(labels: np.ndarray, n_classes: int, n: int, gen: np.random.Generator) -> List[np.ndarray]:
    n_chunks = 2 * n
    members = _class_members(labels, n_classes)
    present = [c for c in range(n_classes) if members[c].size > 0]
    if n_chunks < len(present):
        raise ConfigurationError(
            f"Non-IID2 with {n} workers gives {n_chunks} chunks, fewer than the "
            f"{len(present)} classes present; every chunk must hold a single class"
        )

    # Chunks are handed out to classes as evenly as possible; extra chunks go
    # to a seeded selection of classes. Each chunk holds one class only.
    per_class = {c: n_chunks // len(present) for c in present}
    for c in gen.permutation(present)[: n_chunks % len(present)]:
        per_class[int(c)] += 1

    chunks = []
    for c in present:
        chunks.extend(np.array_split(members[c], per_class[c]))

    dealt = gen.permutation(n_chunks)
    return [np.concatenate([chunks[dealt[2 * i]], chunks[dealt[2 * i + 1]]]) for i in range(n)]


def _non_iid1(labels: np.ndarray, n_classes: int, n: int,
              gen: np.random.Generator) -> Tuple[List[np.ndarray], int]:
    members = _class_members(labels, n_classes)
    present = [c for c in range(n_classes) if members[c].size > 0]
    class_order = [present[j] for j in gen.permutation(len(present))]

    owners = {c: [] for c in class_order}
    for i in range(n):
        owners[class_order[i % len(class_order)]].append(i)

    assignment: List[np.ndarray] = [np.empty(0, dtype=np.int64)] * n
    dropped = 0
    for c in class_order:
        if not owners[c]:
            dropped += int(members[c].size)
            continue
        if members[c].size < len(owners[c]):
            raise ConfigurationError(
                f"Class {c} has {members[c].size} samples, too few for {len(owners[c])} workers"
            )
        for worker, part in zip(owners[c], np.array_split(members[c], len(owners[c]))):
            assignment[worker] = part
    return assignment, dropped


def partition(dataset: LabeledDataset, n: int, mode, rng: RandomSource) -> Partition:
    """
    Split a dataset among ``n`` workers.

    IID: uniform shuffle into equal shards; the ``len % n`` remainder is
    dropped. Non-IID2: samples sorted by label and cut into 2n single-class
    chunks, two random chunks per worker, each chunk used once. Non-IID1:
    each worker holds one class (classes reused round-robin with disjoint
    sample splits when n exceeds the class count; classes left without a
    worker are dropped).

    Args:
        dataset: Dataset to split.
        n: Worker count.
        mode: ``PartitionMode`` or its string name.
        rng: Random source; a fixed seed gives an identical partition.

    Returns:
        The ``Partition``.

    Raises:
        TypeError: If ``dataset`` is not a ``LabeledDataset``.
        ConfigurationError: For an infeasible (n, classes, mode) combination.

    Example:
        >>> part = partition(ds, 10, "noniid1", RngStream(7, purpose=Purpose.PARTITION))
    """
    if not isinstance(dataset, LabeledDataset):
        raise TypeError("partition expects a LabeledDataset")
    if n < 1:
        raise ConfigurationError(f"Worker count must be positive, got {n}")
    mode = mode if isinstance(mode, PartitionMode) else PartitionMode.parse(mode)
    gen = as_generator(rng)
    labels = dataset.labels

    dropped = 0
    if mode is PartitionMode.IID:
        assignment = _iid(labels, n, gen)
        dropped = len(dataset) - n * (len(dataset) // n)
    elif mode is PartitionMode.NON_IID2:
        if n > dataset.n_classes:
            raise ConfigurationError(
                f"Non-IID2 needs at most {dataset.n_classes} workers for {dataset.n_classes} classes, got {n}"
            )
        assignment = _non_iid2(labels, dataset.n_classes, n, gen)
    else:
        assignment, dropped = _non_iid1(labels, dataset.n_classes, n, gen)

    assignment = tuple(np.sort(idx).astype(np.int64) for idx in assignment)
    empty = [i for i, idx in enumerate(assignment) if idx.size == 0]
    if empty:
        raise ConfigurationError(f"Workers {empty} received no samples under {mode.value}")
    if dropped:
        logger.warning(f"{mode.value} partition dropped {dropped} of {len(dataset)} samples")
    logger.info(
        f"Built {mode.value} partition for {n} workers, shard sizes {min(len(a) for a in assignment)}"
        f"-{max(len(a) for a in assignment)}"
    )
    return Partition(assignment=assignment, mode=mode, dropped=dropped)
