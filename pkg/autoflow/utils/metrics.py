"""
Classification metrics used as fitness and in reports.
"""

from typing import Sequence, Tuple

import numpy as np

from ..exceptions import MetricError


def _as_label_arrays(y_true: Sequence[int], y_pred: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    y_true = np.asarray(y_true, dtype=np.int64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.int64).ravel()
    if y_true.size == 0:
        raise MetricError("Metrics need at least one sample", error_code='EMPTY_INPUT')
    if y_true.size != y_pred.size:
        raise MetricError(
            f"Length mismatch: {y_true.size} true labels vs {y_pred.size} predictions",
            error_code='LENGTH_MISMATCH',
        )
    return y_true, y_pred


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int]) -> np.ndarray:
    """Counts[i, j] = samples of true class i predicted as j."""
    y_true, y_pred = _as_label_arrays(y_true, y_pred)
    size = int(max(y_true.max(), y_pred.max())) + 1
    matrix = np.zeros((size, size), dtype=np.int64)
    np.add.at(matrix, (y_true, y_pred), 1)
    return matrix


def balanced_accuracy(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """
    Mean per-class recall over the classes present in ``y_true``.

    Raises:
        MetricError: On empty input or length mismatch
    """
    matrix = confusion_matrix(y_true, y_pred)
    support = matrix.sum(axis=1)
    present = support > 0
    recalls = np.diag(matrix)[present] / support[present]
    return float(recalls.mean())


def macro_f1(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """
    Unweighted mean F1 over the classes present in ``y_true``.

    A class with precision + recall = 0 scores 0.
    """
    matrix = confusion_matrix(y_true, y_pred)
    support = matrix.sum(axis=1)
    predicted = matrix.sum(axis=0)
    true_positives = np.diag(matrix)
    scores = []
    for label in np.flatnonzero(support > 0):
        tp = true_positives[label]
        precision = tp / predicted[label] if predicted[label] else 0.0
        recall = tp / support[label]
        scores.append(0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def loss(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """Validation loss minimised by the search: 1 - balanced accuracy."""
    return 1.0 - balanced_accuracy(y_true, y_pred)


METRICS = {
    'balanced_accuracy': balanced_accuracy,
    'macro_f1': macro_f1,
}
