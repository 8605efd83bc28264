"""Seeded shuffling into fixed-size batches."""

from typing import List, Optional, Tuple

import numpy as np

from capsgan.data.idx import Dataset
from capsgan.utils.exceptions import UsageException
from capsgan.utils.seeding import Stream, stream_rng

Batch = Tuple[np.ndarray, Optional[np.ndarray]]


def shuffled_order(size: int, seed: int, epoch: int) -> np.ndarray:
    return stream_rng(seed, Stream.SHUFFLE, epoch).permutation(size)


def make_batches(dataset: Dataset, batch_size: int, seed: int, epoch: int) -> List[Batch]:
    """
    Shuffle by (seed, epoch) and cut into full batches of (images, labels).

    The remainder smaller than `batch_size` is dropped.
    """
    if batch_size < 1:
        raise UsageException(f"batch size must be at least 1, got {batch_size}", {"batch_size": batch_size})
    order = shuffled_order(len(dataset), seed, epoch)
    batches: List[Batch] = []
    for start in range(0, len(order) - batch_size + 1, batch_size):
        index = order[start:start + batch_size]
        labels = None if dataset.labels is None else dataset.labels[index]
        batches.append((dataset.images[index], labels))
    return batches
