"""
CART decision trees and random forests.

Trees are stored as flat node arrays so fitted state serialises directly to
JSON lists. Leaf nodes have ``feature == -1``.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..constants import StepRole
from ..exceptions import StepFailure
from .base import Checkpoint, StepModel, register_step, require_labels

logger = logging.getLogger(__name__)

LEAF = -1
MIN_GAIN = 1e-12


def _impurity(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Gini or entropy of class-count rows (last axis = classes)."""
    totals = counts.sum(axis=-1, keepdims=True)
    proportions = np.divide(counts, totals, out=np.zeros_like(counts, dtype=np.float64), where=totals > 0)
    if criterion == 'gini':
        return 1.0 - (proportions ** 2).sum(axis=-1)
    logs = np.log2(proportions, out=np.zeros_like(proportions), where=proportions > 0)
    return -(proportions * logs).sum(axis=-1)


def _feature_sample_size(max_features: str, n_features: int) -> int:
    if max_features == 'sqrt':
        return max(1, int(np.sqrt(n_features)))
    if max_features == 'log2':
        return max(1, int(np.log2(n_features))) if n_features > 1 else 1
    if max_features == 'all':
        return n_features
    raise StepFailure(f"Unknown maxFeatures '{max_features}'", error_code='INVALID_HPARAM')


def _leaf_class(counts: np.ndarray, parent_majority: Optional[int]) -> int:
    """Majority class; ties resolve to the parent majority, else the lowest id."""
    tied = np.flatnonzero(counts == counts.max())
    if len(tied) > 1 and parent_majority is not None and parent_majority in tied:
        return int(parent_majority)
    return int(tied[0])


@dataclass
class TreeArrays:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[nodes] != LEAF
        while active.any():
            current = nodes[active]
            go_left = X[rows[active], self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return self.value[nodes]

    def to_dict(self) -> Dict[str, List]:
        return {
            'feature': self.feature.tolist(),
            'threshold': self.threshold.tolist(),
            'left': self.left.tolist(),
            'right': self.right.tolist(),
            'value': self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List]) -> 'TreeArrays':
        return cls(
            np.asarray(data['feature'], dtype=np.int64),
            np.asarray(data['threshold'], dtype=np.float64),
            np.asarray(data['left'], dtype=np.int64),
            np.asarray(data['right'], dtype=np.int64),
            np.asarray(data['value'], dtype=np.int64),
        )


def _best_split(X, y, n_classes, features, criterion):
    """Return (feature, threshold, weighted impurity) of the best split, or None."""
    best = None
    n = X.shape[0]
    for feature in features:
        order = np.argsort(X[:, feature], kind='stable')
        values = X[order, feature]
        one_hot = np.zeros((n, n_classes))
        one_hot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(one_hot, axis=0)[:-1]
        right_counts = left_counts[-1] + one_hot[-1] - left_counts
        valid = values[:-1] < values[1:]
        if not valid.any():
            continue
        sizes = np.arange(1, n)
        weighted = sizes * _impurity(left_counts, criterion) + (n - sizes) * _impurity(right_counts, criterion)
        weighted = np.where(valid, weighted, np.inf)
        position = int(np.argmin(weighted))
        if best is None or weighted[position] < best[2]:
            threshold = (values[position] + values[position + 1]) / 2.0
            best = (int(feature), float(threshold), float(weighted[position]))
    return best


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    criterion: str,
    max_depth: int,
    max_features: str,
    rng: np.random.Generator,
    checkpoint: Checkpoint = None,
) -> TreeArrays:
    """
    Grow a CART tree depth-first.

    A node splits while it is impure, below ``max_depth`` and some split
    lowers the weighted impurity. Candidate features are drawn per split
    unless ``max_features`` is ``all``.
    """
    if criterion not in ('gini', 'entropy'):
        raise StepFailure(f"Unknown criterion '{criterion}'", error_code='INVALID_HPARAM')
    n_features = X.shape[1]
    sample_size = _feature_sample_size(max_features, n_features)

    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.arange(X.shape[0]), 0, None, None)]
    while stack:
        indices, depth, parent_majority, link = stack.pop()
        if checkpoint:
            checkpoint()
        node = len(feature)
        if link is not None:
            parent, side = link
            (left if side == 'left' else right)[parent] = node

        counts = np.bincount(y[indices], minlength=n_classes).astype(np.float64)
        majority = _leaf_class(counts, parent_majority)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(majority)

        if depth >= max_depth or indices.size < 2 or np.count_nonzero(counts) < 2:
            continue
        if sample_size < n_features:
            candidates = np.sort(rng.choice(n_features, size=sample_size, replace=False))
        else:
            candidates = np.arange(n_features)
        split = _best_split(X[indices], y[indices], n_classes, candidates, criterion)
        if split is None:
            continue
        split_feature, split_threshold, weighted = split
        if indices.size * _impurity(counts, criterion) - weighted <= MIN_GAIN:
            continue

        feature[node] = split_feature
        threshold[node] = split_threshold
        goes_left = X[indices, split_feature] <= split_threshold
        # right pushed first so the left subtree is numbered first
        stack.append((indices[~goes_left], depth + 1, majority, (node, 'right')))
        stack.append((indices[goes_left], depth + 1, majority, (node, 'left')))

    return TreeArrays(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.int64),
    )


def _tree_hparams(hparams) -> Dict:
    return {
        'criterion': hparams.get('criterion', 'gini'),
        'max_depth': int(hparams.get('maxDepth', 30)),
        'max_features': hparams.get('maxFeatures', 'all'),
    }


@register_step('decisionTree', StepRole.CLASSIFIER)
class DecisionTree(StepModel):

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        self.n_classes_ = int(y.max()) + 1
        self.tree_ = build_tree(X, y, self.n_classes_, rng=rng, checkpoint=checkpoint, **_tree_hparams(self.hparams))

    def _predict(self, X):
        return self.tree_.predict(X)

    def get_state(self):
        return {'n_classes': self.n_classes_, 'tree': self.tree_.to_dict()}

    def set_state(self, state):
        self.n_classes_ = int(state['n_classes'])
        self.tree_ = TreeArrays.from_dict(state['tree'])


@register_step('randomForest', StepRole.CLASSIFIER)
class RandomForest(StepModel):
    """
    Bagged CART trees with majority vote (ties to the lowest class id).

    Every tree gets its own generator seeded from the step stream, so the
    fitted forest depends only on the step seed. ``bootstrap`` (default true)
    resamples the training rows per tree.
    """

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        n_estimators = int(self.hparams.get('nEstimators', 100))
        bootstrap = bool(self.hparams.get('bootstrap', True))
        tree_params = _tree_hparams(self.hparams)
        self.n_classes_ = int(y.max()) + 1

        seeds = rng.integers(0, 2 ** 63 - 1, size=n_estimators)
        self.trees_ = []
        for seed in seeds:
            tree_rng = np.random.default_rng(int(seed))
            rows = tree_rng.integers(0, X.shape[0], size=X.shape[0]) if bootstrap else np.arange(X.shape[0])
            self.trees_.append(
                build_tree(X[rows], y[rows], self.n_classes_, rng=tree_rng, checkpoint=checkpoint, **tree_params)
            )
        logger.debug(f"randomForest fitted {n_estimators} trees (bootstrap={bootstrap})")

    def _predict(self, X):
        votes = np.zeros((X.shape[0], self.n_classes_), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            votes[rows, tree.predict(X)] += 1
        return np.argmax(votes, axis=1)

    def get_state(self):
        return {'n_classes': self.n_classes_, 'trees': [tree.to_dict() for tree in self.trees_]}

    def set_state(self, state):
        self.n_classes_ = int(state['n_classes'])
        self.trees_ = [TreeArrays.from_dict(tree) for tree in state['trees']]
