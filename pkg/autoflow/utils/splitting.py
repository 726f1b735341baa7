"""
Stratified splitting helpers.
"""

from typing import List

import numpy as np

from ..exceptions import ValidationError


def stratified_kfold(labels, k: int, rng: np.random.Generator) -> List[np.ndarray]:
    """
    Partition sample indices into ``k`` stratified folds.

    Each class is shuffled and dealt round-robin; the dealing position carries
    over between classes, so per-class and overall fold sizes differ by at
    most one.

    Args:
        labels: Integer class ids
        k: Number of folds (>= 2)
        rng: Seeded random stream

    Returns:
        List of ``k`` sorted index arrays

    Raises:
        ValidationError: If k < 2 or k exceeds the sample count
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValidationError(f"k must be at least 2, got {k}", error_code='INVALID_FOLDS')
    if k > labels.size:
        raise ValidationError(
            f"Cannot build {k} folds from {labels.size} samples", error_code='INVALID_FOLDS'
        )
    folds: List[List[int]] = [[] for _ in range(k)]
    position = 0
    for label in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == label))
        for index in members:
            folds[position % k].append(int(index))
            position += 1
    return [np.sort(np.asarray(fold, dtype=np.int64)) for fold in folds]


def fold_pairs(folds: List[np.ndarray]):
    """Yield (train_indices, held_out_indices) for each fold."""
    for index, held_out in enumerate(folds):
        train = np.concatenate([fold for other, fold in enumerate(folds) if other != index])
        yield np.sort(train), held_out
