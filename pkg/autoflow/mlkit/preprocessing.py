"""
Preprocessing steps: scaling, feature selection and feature construction.
"""

import logging

import numpy as np

from ..constants import StepRole
from ..exceptions import StepFailure
from .base import StepModel, register_step, require_labels

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the largest one count as zero variance.
EIGEN_TOLERANCE = 1e-10


def _array(state, key, dtype=np.float64) -> np.ndarray:
    return np.asarray(state[key], dtype=dtype)


@register_step('minMaxScaler', StepRole.PREPROCESSING)
class MinMaxScaler(StepModel):
    """Rescale each feature to [0, 1]; constant features map to 0."""

    def _fit(self, X, y, rng, checkpoint):
        self.data_min_ = X.min(axis=0)
        self.data_range_ = X.max(axis=0) - self.data_min_

    def _transform(self, X):
        shifted = X - self.data_min_
        safe_range = np.where(self.data_range_ > 0, self.data_range_, 1.0)
        return np.where(self.data_range_ > 0, shifted / safe_range, 0.0)

    def get_state(self):
        return {'data_min': self.data_min_.tolist(), 'data_range': self.data_range_.tolist()}

    def set_state(self, state):
        self.data_min_ = _array(state, 'data_min')
        self.data_range_ = _array(state, 'data_range')


@register_step('varianceThreshold', StepRole.PREPROCESSING)
class VarianceThreshold(StepModel):
    """Drop features whose training variance is at most ``threshold``."""

    def _fit(self, X, y, rng, checkpoint):
        threshold = float(self.hparams.get('threshold', 0.0))
        self.variances_ = X.var(axis=0)
        self.support_ = np.flatnonzero(self.variances_ > threshold)
        if self.support_.size == 0:
            raise StepFailure(
                f"varianceThreshold({threshold}) drops all {X.shape[1]} features",
                error_code='ALL_FEATURES_DROPPED',
            )

    def _transform(self, X):
        return X[:, self.support_]

    def get_state(self):
        return {'variances': self.variances_.tolist(), 'support': self.support_.tolist()}

    def set_state(self, state):
        self.variances_ = _array(state, 'variances')
        self.support_ = _array(state, 'support', np.int64)


@register_step('normalizer', StepRole.PREPROCESSING)
class Normalizer(StepModel):
    """Scale each sample to unit ``norm`` (l1, l2 or max). Zero rows are left as they are."""

    def _fit(self, X, y, rng, checkpoint):
        norm = self.hparams.get('norm', 'l2')
        if norm not in ('l1', 'l2', 'max'):
            raise StepFailure(f"Unknown norm '{norm}'", error_code='INVALID_HPARAM')
        self.norm_ = norm

    def _transform(self, X):
        if self.norm_ == 'l1':
            norms = np.abs(X).sum(axis=1)
        elif self.norm_ == 'l2':
            norms = np.sqrt((X * X).sum(axis=1))
        else:
            norms = np.abs(X).max(axis=1)
        norms = np.where(norms > 0, norms, 1.0)
        return X / norms[:, np.newaxis]

    def get_state(self):
        return {'norm': self.norm_}

    def set_state(self, state):
        self.norm_ = state['norm']


def anova_f_scores(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    One-way ANOVA F-statistic of every feature against the class labels.

    Uses the pooled within-class variance. A feature with zero within-class
    variance scores +inf when the class means differ and 0 when they do not.
    """
    classes = np.unique(y)
    n_samples = X.shape[0]
    grand_mean = X.mean(axis=0)
    between = np.zeros(X.shape[1])
    within = np.zeros(X.shape[1])
    for label in classes:
        members = X[y == label]
        class_mean = members.mean(axis=0)
        between += members.shape[0] * (class_mean - grand_mean) ** 2
        within += ((members - class_mean) ** 2).sum(axis=0)

    df_between = len(classes) - 1
    df_within = n_samples - len(classes)
    if df_between < 1:
        return np.zeros(X.shape[1])

    mean_between = between / df_between
    mean_within = within / df_within if df_within > 0 else within
    scores = np.zeros(X.shape[1])
    degenerate = mean_within <= 0
    scores[~degenerate] = mean_between[~degenerate] / mean_within[~degenerate]
    scores[degenerate & (mean_between > 0)] = np.inf
    return scores


@register_step('selectPercentile', StepRole.PREPROCESSING)
class SelectPercentile(StepModel):
    """
    Keep the top ``percentile`` percent of features by ANOVA F-score.

    At least one feature is kept. Equal scores favour the lower feature index
    and kept features stay in their original order.
    """

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        percentile = int(self.hparams.get('percentile', 10))
        self.scores_ = anova_f_scores(X, y)
        n_keep = max(1, int(X.shape[1] * percentile // 100))
        ranking = np.argsort(-self.scores_, kind='stable')
        self.support_ = np.sort(ranking[:n_keep])

    def _transform(self, X):
        return X[:, self.support_]

    def get_state(self):
        # +inf is not valid JSON
        return {
            'scores': [None if np.isinf(s) else float(s) for s in self.scores_],
            'support': self.support_.tolist(),
        }

    def set_state(self, state):
        self.scores_ = np.asarray([np.inf if s is None else s for s in state['scores']], dtype=np.float64)
        self.support_ = _array(state, 'support', np.int64)


@register_step('pca', StepRole.PREPROCESSING)
class PCA(StepModel):
    """
    Principal component projection.

    ``nComponents`` is clamped to min(features, samples - 1). Each component's
    sign is fixed so its largest-magnitude loading is positive. With
    ``whiten`` the projections are divided by the component standard deviation.
    """

    def _fit(self, X, y, rng, checkpoint):
        n_samples, n_features = X.shape
        if n_samples < 2:
            raise StepFailure("pca needs at least 2 samples", error_code='DEGENERATE_COVARIANCE')
        requested = int(self.hparams.get('nComponents', n_features))
        n_components = max(1, min(requested, n_features, n_samples - 1))
        whiten = bool(self.hparams.get('whiten', False))

        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        covariance = centered.T @ centered / (n_samples - 1)
        eigenvalues, eigenvectors = np.linalg.eigh(covariance)
        order = np.argsort(-eigenvalues, kind='stable')
        eigenvalues = np.clip(eigenvalues[order], 0.0, None)
        eigenvectors = eigenvectors[:, order]

        components = eigenvectors[:, :n_components].T
        pivots = np.argmax(np.abs(components), axis=1)
        signs = np.sign(components[np.arange(n_components), pivots])
        components *= np.where(signs == 0, 1.0, signs)[:, np.newaxis]

        total = eigenvalues.sum()
        self.components_ = components
        self.explained_variance_ = eigenvalues[:n_components]
        self.explained_variance_ratio_ = (
            self.explained_variance_ / total if total > 0 else np.zeros(n_components)
        )
        if whiten:
            floor = EIGEN_TOLERANCE * max(float(eigenvalues[0]), np.finfo(float).tiny)
            if np.any(self.explained_variance_ <= floor):
                raise StepFailure(
                    f"pca cannot whiten {n_components} components: degenerate covariance",
                    error_code='DEGENERATE_COVARIANCE',
                )
            self.scale_ = np.sqrt(self.explained_variance_)
        else:
            self.scale_ = np.ones(n_components)
        logger.debug(f"pca kept {n_components} of {n_features} dimensions (requested {requested})")

    def _transform(self, X):
        return (X - self.mean_) @ self.components_.T / self.scale_

    def get_state(self):
        return {
            'mean': self.mean_.tolist(),
            'components': self.components_.tolist(),
            'explained_variance': self.explained_variance_.tolist(),
            'explained_variance_ratio': self.explained_variance_ratio_.tolist(),
            'scale': self.scale_.tolist(),
        }

    def set_state(self, state):
        self.mean_ = _array(state, 'mean')
        self.components_ = _array(state, 'components')
        self.explained_variance_ = _array(state, 'explained_variance')
        self.explained_variance_ratio_ = _array(state, 'explained_variance_ratio')
        self.scale_ = _array(state, 'scale')


@register_step('rbfSampler', StepRole.PREPROCESSING)
class RBFSampler(StepModel):
    """Random Fourier features approximating an RBF kernel with width ``gamma``."""

    def _fit(self, X, y, rng, checkpoint):
        gamma = float(self.hparams.get('gamma', 1.0))
        n_components = int(self.hparams.get('nComponents', 100))
        self.weights_ = np.sqrt(2.0 * gamma) * rng.standard_normal((X.shape[1], n_components))
        self.offsets_ = rng.uniform(0.0, 2.0 * np.pi, size=n_components)

    def _transform(self, X):
        n_components = self.offsets_.shape[0]
        return np.sqrt(2.0 / n_components) * np.cos(X @ self.weights_ + self.offsets_)

    def get_state(self):
        return {'weights': self.weights_.tolist(), 'offsets': self.offsets_.tolist()}

    def set_state(self, state):
        self.weights_ = _array(state, 'weights')
        self.offsets_ = _array(state, 'offsets')
