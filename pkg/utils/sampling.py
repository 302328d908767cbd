"""Synthetic data generation and per-tree row sampling."""

from typing import Tuple, Union

import numpy as np

from .dataset_reader import ColumnarDataset, SampleIndexSet

SeedLike = Union[int, np.random.SeedSequence]

DEFAULT_BOOTSTRAP_FRACTION = 0.632


def trunk_means(n_features: int) -> np.ndarray:
    """Per-feature class-0 mean 1/sqrt(i+1); class 1 uses the negation."""
    return 1.0 / np.sqrt(np.arange(1, n_features + 1, dtype=np.float64))


def generate_trunk(n_samples: int, n_features: int, seed: int,
                   dtype=np.float32) -> ColumnarDataset:
    """
    Generate the two-class Trunk Gaussian benchmark.

    Rows alternate between class 0 and class 1, so each class has exactly
    n_samples / 2 rows and every prefix of the table is balanced.

    Args:
        n_samples: Total rows (must be even)
        n_features: Feature count p
        seed: Random seed

    Raises:
        ValueError: If n_samples is odd or sizes are not positive
    """
    if n_samples < 2 or n_samples % 2:
        raise ValueError(f"n_samples must be a positive even number, got {n_samples}")
    if n_features < 1:
        raise ValueError(f"n_features must be at least 1, got {n_features}")

    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples, dtype=np.intp) % 2
    signs = np.where(labels == 0, 1.0, -1.0)
    columns = rng.standard_normal((n_features, n_samples))
    columns += trunk_means(n_features)[:, None] * signs[None, :]
    return ColumnarDataset(columns=columns.astype(dtype), labels=labels, class_count=2)


def bootstrap_sample(dataset: ColumnarDataset, fraction: float = DEFAULT_BOOTSTRAP_FRACTION,
                     seed: SeedLike = 0) -> SampleIndexSet:
    """
    Draw round(fraction * n_samples) distinct rows without replacement.

    Raises:
        ValueError: If fraction is outside (0, 1]
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"Bootstrap fraction must be in (0, 1], got {fraction}")

    n = dataset.n_samples
    if fraction == 1.0:
        return SampleIndexSet.full(n)
    size = max(1, int(round(fraction * n)))
    rng = np.random.default_rng(seed)
    picked = rng.choice(n, size=size, replace=False)
    return SampleIndexSet(np.sort(picked).astype(np.intp))


def train_test_split(dataset: ColumnarDataset, test_fraction: float = 0.2,
                     seed: int = 0) -> Tuple[ColumnarDataset, ColumnarDataset]:
    """Stratified hold-out split of a dataset's rows."""
    from sklearn.model_selection import train_test_split as split_indices

    train_idx, test_idx = split_indices(
        np.arange(dataset.n_samples), test_size=test_fraction,
        random_state=seed, stratify=dataset.labels,
    )
    return dataset.subset(np.sort(train_idx)), dataset.subset(np.sort(test_idx))
