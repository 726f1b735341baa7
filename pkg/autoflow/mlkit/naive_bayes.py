"""
Gaussian and Bernoulli naive Bayes classifiers.

Classes absent from the training labels keep a log prior of -inf and are
never predicted.
"""

import numpy as np

from ..constants import StepRole
from ..exceptions import StepFailure
from .base import StepModel, register_step, require_labels


def _normalise_log(joint: np.ndarray) -> np.ndarray:
    """Posterior probabilities from joint log-likelihoods (log-sum-exp)."""
    top = np.max(joint, axis=1, keepdims=True)
    shifted = np.exp(joint - top)
    return shifted / shifted.sum(axis=1, keepdims=True)


class NaiveBayes(StepModel):

    def _joint_log_likelihood(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, X) -> np.ndarray:
        return _normalise_log(self._joint_log_likelihood(self._check_input(X)))

    def _predict(self, X):
        return np.argmax(self._joint_log_likelihood(X), axis=1)

    @staticmethod
    def _class_counts(y) -> np.ndarray:
        return np.bincount(y, minlength=int(y.max()) + 1).astype(np.float64)


@register_step('gaussianNB', StepRole.CLASSIFIER)
class GaussianNB(NaiveBayes):
    """Per-class Gaussian likelihoods; ``varSmoothing`` x max feature variance is added to every variance."""

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        counts = self._class_counts(y)
        n_classes = counts.shape[0]
        epsilon = float(self.hparams.get('varSmoothing', 1e-9)) * float(X.var(axis=0).max())

        self.theta_ = np.zeros((n_classes, X.shape[1]))
        self.var_ = np.ones((n_classes, X.shape[1]))
        for label in np.flatnonzero(counts):
            members = X[y == label]
            self.theta_[label] = members.mean(axis=0)
            self.var_[label] = members.var(axis=0) + epsilon
        if np.any(self.var_ <= 0):
            raise StepFailure("gaussianNB: degenerate (zero) feature variance", error_code='DEGENERATE_VARIANCE')
        with np.errstate(divide='ignore'):
            self.class_log_prior_ = np.log(counts / counts.sum())

    def _joint_log_likelihood(self, X):
        log_norm = -0.5 * np.log(2.0 * np.pi * self.var_).sum(axis=1)
        squared = ((X[:, np.newaxis, :] - self.theta_[np.newaxis]) ** 2 / self.var_[np.newaxis]).sum(axis=2)
        return self.class_log_prior_ + log_norm - 0.5 * squared

    def get_state(self):
        return {
            'theta': self.theta_.tolist(),
            'var': self.var_.tolist(),
            'class_log_prior': [None if np.isneginf(v) else float(v) for v in self.class_log_prior_],
        }

    def set_state(self, state):
        self.theta_ = np.asarray(state['theta'], dtype=np.float64)
        self.var_ = np.asarray(state['var'], dtype=np.float64)
        self.class_log_prior_ = np.asarray(
            [-np.inf if v is None else v for v in state['class_log_prior']], dtype=np.float64
        )


@register_step('bernouilliNB', StepRole.CLASSIFIER)
class BernoulliNB(NaiveBayes):
    """Features binarised at 0 with Laplace smoothing ``alpha``; ``fitPrior`` false uses uniform priors."""

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        alpha = float(self.hparams.get('alpha', 1.0))
        fit_prior = bool(self.hparams.get('fitPrior', True))
        counts = self._class_counts(y)
        n_classes = counts.shape[0]
        binary = (X > 0).astype(np.float64)

        feature_counts = np.zeros((n_classes, X.shape[1]))
        np.add.at(feature_counts, y, binary)
        probabilities = (feature_counts + alpha) / (counts[:, np.newaxis] + 2.0 * alpha)
        self.feature_log_prob_ = np.log(probabilities)
        self.feature_log_neg_prob_ = np.log1p(-probabilities)
        with np.errstate(divide='ignore'):
            if fit_prior:
                self.class_log_prior_ = np.log(counts / counts.sum())
            else:
                present = counts > 0
                self.class_log_prior_ = np.where(present, -np.log(present.sum()), -np.inf)

    def _joint_log_likelihood(self, X):
        binary = (X > 0).astype(np.float64)
        return (
            binary @ self.feature_log_prob_.T
            + (1.0 - binary) @ self.feature_log_neg_prob_.T
            + self.class_log_prior_
        )

    def get_state(self):
        return {
            'feature_log_prob': self.feature_log_prob_.tolist(),
            'feature_log_neg_prob': self.feature_log_neg_prob_.tolist(),
            'class_log_prior': [None if np.isneginf(v) else float(v) for v in self.class_log_prior_],
        }

    def set_state(self, state):
        self.feature_log_prob_ = np.asarray(state['feature_log_prob'], dtype=np.float64)
        self.feature_log_neg_prob_ = np.asarray(state['feature_log_neg_prob'], dtype=np.float64)
        self.class_log_prior_ = np.asarray(
            [-np.inf if v is None else v for v in state['class_log_prior']], dtype=np.float64
        )
