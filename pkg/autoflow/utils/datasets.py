"""
Tabular dataset ingestion and splitting.

Only CSV input is supported and missing values are rejected: the shipped
algorithm catalogue has no imputer.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import DatasetError, DatasetFormatError

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """
    Feature matrix with dense integer labels 0..K-1.

    ``class_names[i]`` is the original label of class id ``i``.
    """
    features: np.ndarray
    labels: np.ndarray
    class_names: List[str]
    feature_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DatasetError("Features must be a 2-D matrix", error_code='DATASET_SHAPE')
        if self.features.shape[0] != self.labels.shape[0]:
            raise DatasetError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels",
                error_code='DATASET_SHAPE',
            )
        if len(self.class_names) < 2:
            raise DatasetError("Datasets need at least 2 classes", error_code='SINGLE_CLASS')
        if np.isnan(self.features).any():
            raise DatasetError("Features contain NaN values", error_code='MISSING_VALUES')
        if np.isinf(self.features).any():
            raise DatasetError("Features contain infinite values", error_code='NON_FINITE_VALUES')
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise DatasetError("Labels must be class ids in 0..K-1", error_code='DATASET_LABELS')
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.features.shape[1])]

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, indices) -> 'Dataset':
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices], list(self.class_names), list(self.feature_names))

    def encode_labels(self, raw_labels) -> np.ndarray:
        """Map original label strings to this dataset's class ids."""
        lookup = {name: index for index, name in enumerate(self.class_names)}
        try:
            return np.asarray([lookup[str(label)] for label in raw_labels], dtype=np.int64)
        except KeyError as e:
            raise DatasetError(f"Unknown class label {e.args[0]!r}", error_code='UNKNOWN_CLASS')


def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    if not text:
        raise DatasetFormatError(f"Missing value at row {row}, column '{column}'", row=row, column=column)
    try:
        value = float(text)
    except ValueError:
        raise DatasetFormatError(
            f"Non-numeric value {text!r} at row {row}, column '{column}'", row=row, column=column
        )
    if math.isnan(value):
        raise DatasetFormatError(f"Missing value at row {row}, column '{column}'", row=row, column=column)
    if math.isinf(value):
        raise DatasetFormatError(f"Non-finite value {text!r} at row {row}, column '{column}'", row=row, column=column)
    return value


def load_csv(path, label_column: str, class_names: Optional[List[str]] = None) -> Dataset:
    """
    Load a UTF-8 CSV with a header row.

    Args:
        path: CSV file path
        label_column: Name of the label column
        class_names: Fixed class order (e.g. from a training set); by default
            classes are numbered in first-appearance order

    Returns:
        Dataset

    Raises:
        DatasetError: Missing label column, empty file, single class
        DatasetFormatError: Non-numeric or missing cell (row/column reported)
    """
    path = Path(path)
    with path.open(newline='', encoding='utf-8') as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header:
            raise DatasetError(f"{path} is empty", error_code='EMPTY_FILE')
        header = [name.strip() for name in header]
        if label_column not in header:
            raise DatasetError(
                f"Label column '{label_column}' not found in {path}",
                error_code='MISSING_LABEL_COLUMN',
                details={'columns': header},
            )
        label_index = header.index(label_column)
        feature_columns = [name for i, name in enumerate(header) if i != label_index]

        rows: List[List[float]] = []
        raw_labels: List[str] = []
        for row_number, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DatasetFormatError(
                    f"Row {row_number} has {len(record)} cells, expected {len(header)}", row=row_number
                )
            label = record[label_index].strip()
            if not label:
                raise DatasetFormatError(
                    f"Missing label at row {row_number}", row=row_number, column=label_column
                )
            raw_labels.append(label)
            rows.append([
                _parse_cell(cell, row_number, header[i])
                for i, cell in enumerate(record) if i != label_index
            ])

    if not rows:
        raise DatasetError(f"{path} has no data rows", error_code='EMPTY_FILE')

    if class_names is None:
        class_names = list(dict.fromkeys(raw_labels))
    dataset_classes = list(class_names)
    if len(dataset_classes) < 2:
        raise DatasetError(f"{path} has a single class", error_code='SINGLE_CLASS')

    lookup = {name: index for index, name in enumerate(dataset_classes)}
    unknown = sorted(set(raw_labels) - set(lookup))
    if unknown:
        raise DatasetError(f"Unknown class labels {unknown} in {path}", error_code='UNKNOWN_CLASS')

    dataset = Dataset(
        features=np.asarray(rows, dtype=np.float64),
        labels=np.asarray([lookup[label] for label in raw_labels], dtype=np.int64),
        class_names=dataset_classes,
        feature_names=feature_columns,
    )
    logger.info(
        f"Loaded {path.name}: {dataset.n_samples} samples, {dataset.n_features} features, "
        f"{dataset.n_classes} classes"
    )
    return dataset


def write_csv(dataset: Dataset, path, label_column: str = 'label') -> None:
    """Write a dataset as CSV (features in ``repr`` precision, label last)."""
    with Path(path).open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [dataset.class_names[label]])


def holdout_split(dataset: Dataset, fraction: float, rng: np.random.Generator) -> Tuple[Dataset, Dataset]:
    """
    Stratified train/test split.

    The test size is ``round(fraction * n)``, shared between classes by largest
    remainder of their proportional quotas (ties to the lower class id).

    Raises:
        DatasetError: If the fraction is outside (0, 0.5] or a class would be
            missing from either side
    """
    if not 0.0 < fraction <= 0.5:
        raise DatasetError(f"Holdout fraction must be in (0, 0.5]. Got: {fraction}", error_code='INVALID_FRACTION')

    classes = np.arange(dataset.n_classes)
    counts = np.bincount(dataset.labels, minlength=dataset.n_classes)
    quotas = fraction * counts
    allocation = np.floor(quotas).astype(np.int64)
    remaining = int(round(fraction * dataset.n_samples)) - int(allocation.sum())
    order = sorted(classes, key=lambda c: (-(quotas[c] - allocation[c]), c))
    for label in order[:max(remaining, 0)]:
        allocation[label] += 1

    for label in classes:
        if counts[label] and (allocation[label] < 1 or allocation[label] >= counts[label]):
            raise DatasetError(
                f"Class '{dataset.class_names[label]}' with {counts[label]} samples is too small to stratify",
                error_code='CLASS_TOO_SMALL',
            )

    test_indices = []
    for label in classes:
        members = rng.permutation(np.flatnonzero(dataset.labels == label))
        test_indices.extend(members[:allocation[label]].tolist())
    test_mask = np.zeros(dataset.n_samples, dtype=bool)
    test_mask[test_indices] = True
    train_indices = np.flatnonzero(~test_mask)
    test_indices = np.flatnonzero(test_mask)
    return dataset.subset(train_indices), dataset.subset(test_indices)
