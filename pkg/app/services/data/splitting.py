"""
Dataset Splitting
Seeded permutation followed by a contiguous train/val/test split.
"""
import math
from typing import Sequence, Tuple

import numpy as np

from app.schemas.dataset import Dataset


class EmptySplitError(ValueError):
    """Raised when a split would contain no images"""
    pass


def split_sizes(n: int, fractions: Sequence[float]) -> Tuple[int, int, int]:
    """
    Split sizes: val and test are floor(n * fraction), train takes the remainder.

    Args:
        n: Number of images
        fractions: (train, val, test), positive and summing to 1

    Returns:
        (n_train, n_val, n_test)

    Raises:
        EmptySplitError: For invalid fractions or any empty split
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise EmptySplitError(f"fractions must be three positive numbers, got {tuple(fractions)}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise EmptySplitError(f"fractions must sum to 1, got {sum(fractions)}")

    n_val = int(math.floor(n * fractions[1] + 1e-9))
    n_test = int(math.floor(n * fractions[2] + 1e-9))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) <= 0:
        raise EmptySplitError(f"{n} images cannot fill splits {tuple(fractions)}")
    return n_train, n_val, n_test


def split_indices(n: int, fractions: Sequence[float], seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint, exhaustive index sets for train/val/test."""
    n_train, n_val, _ = split_sizes(n, fractions)
    order = np.random.default_rng(seed).permutation(n)
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def split(ds: Dataset, fractions: Sequence[float], seed: int) -> Tuple[Dataset, Dataset, Dataset]:
    """
    Seeded train/val/test split.

    Args:
        ds: Dataset to split
        fractions: (train, val, test)
        seed: Permutation seed

    Returns:
        (train, val, test) datasets
    """
    train_idx, val_idx, test_idx = split_indices(len(ds), fractions, seed)
    return ds.subset(train_idx), ds.subset(val_idx), ds.subset(test_idx)
