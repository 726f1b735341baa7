"""
k-nearest-neighbours classifier.
"""

import numpy as np

from ..constants import StepRole
from ..exceptions import StepFailure
from .base import StepModel, register_step, require_labels

# Upper bound on the (rows x train x features) distance block held in memory.
BLOCK_ELEMENTS = 4_000_000


@register_step('kNN', StepRole.CLASSIFIER)
class KNeighbors(StepModel):
    """
    Minkowski kNN (``p`` in {1, 2}) with uniform or inverse-distance votes.

    Equal distances rank by lower training index. Under distance weights any
    neighbour at distance 0 takes the whole vote. Vote ties go to the lowest
    class id.
    """

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        self.p_ = int(self.hparams.get('p', 2))
        self.weights_ = self.hparams.get('weights', 'uniform')
        if self.p_ not in (1, 2) or self.weights_ not in ('uniform', 'distance'):
            raise StepFailure(f"Invalid kNN hyper-parameters {self.hparams}", error_code='INVALID_HPARAM')
        self.n_neighbors_ = int(self.hparams.get('nNeighbors', 5))
        self.train_X_ = X.copy()
        self.train_y_ = y.copy()
        self.n_classes_ = int(y.max()) + 1

    def _distances(self, block: np.ndarray) -> np.ndarray:
        diff = block[:, np.newaxis, :] - self.train_X_[np.newaxis, :, :]
        if self.p_ == 1:
            return np.abs(diff).sum(axis=2)
        return np.sqrt((diff * diff).sum(axis=2))

    def _predict(self, X):
        k = min(self.n_neighbors_, self.train_X_.shape[0])
        block_rows = max(1, BLOCK_ELEMENTS // max(1, self.train_X_.size))
        predictions = np.empty(X.shape[0], dtype=np.int64)
        for start in range(0, X.shape[0], block_rows):
            block = X[start:start + block_rows]
            distances = self._distances(block)
            neighbours = np.argsort(distances, axis=1, kind='stable')[:, :k]
            nearest = np.take_along_axis(distances, neighbours, axis=1)
            if self.weights_ == 'distance':
                exact = nearest == 0
                weights = np.where(
                    exact.any(axis=1, keepdims=True),
                    exact.astype(np.float64),
                    1.0 / np.where(exact, 1.0, nearest),
                )
            else:
                weights = np.ones_like(nearest)
            votes = np.zeros((block.shape[0], self.n_classes_))
            rows = np.repeat(np.arange(block.shape[0]), k)
            np.add.at(votes, (rows, self.train_y_[neighbours].ravel()), weights.ravel())
            predictions[start:start + block.shape[0]] = np.argmax(votes, axis=1)
        return predictions

    def get_state(self):
        return {
            'p': self.p_,
            'weights': self.weights_,
            'n_neighbors': self.n_neighbors_,
            'n_classes': self.n_classes_,
            'train_X': self.train_X_.tolist(),
            'train_y': self.train_y_.tolist(),
        }

    def set_state(self, state):
        self.p_ = int(state['p'])
        self.weights_ = state['weights']
        self.n_neighbors_ = int(state['n_neighbors'])
        self.n_classes_ = int(state['n_classes'])
        self.train_X_ = np.asarray(state['train_X'], dtype=np.float64)
        self.train_y_ = np.asarray(state['train_y'], dtype=np.int64)
