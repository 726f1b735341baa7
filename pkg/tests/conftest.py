"""
Shared fixtures: the shipped grammar, seeded streams, synthetic datasets and stub steps.
"""

import time

import numpy as np
import pytest

from autoflow.config import EngineConfig, config
from autoflow.constants import StepRole
from autoflow.grammar import DerivationTree, load_grammar
from autoflow.mlkit import register_step, unregister_step
from autoflow.mlkit.base import StepModel, require_labels
from autoflow.utils.datasets import Dataset, write_csv
from autoflow.variation import IdSequence, Individual


@pytest.fixture(scope='session')
def grammar():
    return load_grammar(config.grammar_path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ids():
    return IdSequence()


def gaussian_blobs(n_per_class=30, n_classes=2, n_features=4, spread=3.0, seed=0) -> Dataset:
    """Well separated Gaussian classes centred on multiples of ``spread``."""
    rng = np.random.default_rng(seed)
    features = []
    labels = []
    for label in range(n_classes):
        centre = np.zeros(n_features)
        centre[label % n_features] = spread * (label + 1)
        features.append(rng.normal(centre, 1.0, size=(n_per_class, n_features)))
        labels.extend([label] * n_per_class)
    return Dataset(
        features=np.vstack(features),
        labels=np.asarray(labels),
        class_names=[f"c{label}" for label in range(n_classes)],
    )


@pytest.fixture
def blobs():
    return gaussian_blobs()


@pytest.fixture
def three_class_blobs():
    return gaussian_blobs(n_per_class=20, n_classes=3, n_features=3, seed=1)


@pytest.fixture
def blobs_csv(tmp_path):
    """Train/test CSV files and a matching run configuration."""
    train = gaussian_blobs(n_per_class=40, seed=2)
    test = gaussian_blobs(n_per_class=15, seed=3)
    write_csv(train, tmp_path / 'train.csv', label_column='class')
    write_csv(test, tmp_path / 'test.csv', label_column='class')
    return tmp_path


@pytest.fixture
def small_config():
    return EngineConfig(
        max_gen=2, pop_size=6, arch_size=3, budget=120.0, eval_budget=30.0, k_folds=3, seed=7,
        record_timings=False,
    )


def leaf(symbol, owner=None, value=None):
    return DerivationTree(symbol, owner=owner, value=value)


def node(symbol, alternative, children, structural=True):
    return DerivationTree(symbol, alternative=alternative, children=list(children), structural=structural)


def hp_node(algorithm, values):
    """``<algorithm_hp>`` node binding ``values`` in order."""
    return node(
        f"<{algorithm}_hp>", 0,
        [leaf(name, owner=algorithm, value=value) for name, value in values.items()],
        structural=False,
    )


PREPROCESS_ALTERNATIVES = {
    'selectPercentile': 0, 'rbfSampler': 1, 'pca': 2, 'minMaxScaler': 3, 'varianceThreshold': 4, 'normalizer': 5,
}
CLASSIFIER_ALTERNATIVES = {
    'decisionTree': 0, 'kNN': 1, 'randomForest': 2, 'gaussianNB': 3, 'bernouilliNB': 4,
}


def step_subtree(algorithm, values, alternatives, symbol):
    children = [leaf(algorithm)]
    if values is not None:
        children.append(hp_node(algorithm, values))
    return node(symbol, alternatives[algorithm], children)


def workflow_tree(preprocessors, classifier):
    """
    Build a genotype for the shipped grammar.

    ``preprocessors`` is a list of (algorithm, hparams or None); ``classifier``
    an (algorithm, hparams) pair.
    """
    clf = step_subtree(classifier[0], classifier[1], CLASSIFIER_ALTERNATIVES, '<classifier>')
    if not preprocessors:
        return node('<workflow>', 1, [clf])
    branch = None
    for algorithm, values in preprocessors:
        prep = step_subtree(algorithm, values, PREPROCESS_ALTERNATIVES, '<preprocess>')
        branch = node('<prepBranch>', 0, [prep]) if branch is None else node('<prepBranch>', 1, [branch, prep])
    return node('<workflow>', 0, [branch, clf])


def make_individual(grammar, ids, preprocessors, classifier, fitness=None, predictions=None):
    ind = Individual.from_genotype(workflow_tree(preprocessors, classifier), grammar, ids)
    if fitness is not None:
        ind.fitness = fitness
        ind.predictions = np.asarray(predictions if predictions is not None else [0], dtype=np.int64)
    return ind


PCA_KNN = (
    [('pca', {'whiten': False, 'nComponents': 7})],
    ('kNN', {'nNeighbors': 5, 'weights': 'uniform', 'p': 2}),
)
GAUSSIAN_NB = ([], ('gaussianNB', {'varSmoothing': 1e-9}))


class MajorityClass(StepModel):
    """Predicts the training majority, ties to the lowest class."""

    def _fit(self, X, y, rng, checkpoint):
        y = require_labels(self, y)
        self.label_ = int(np.argmax(np.bincount(y)))

    def _predict(self, X):
        return np.full(X.shape[0], self.label_)

    def get_state(self):
        return {'label': self.label_}

    def set_state(self, state):
        self.label_ = int(state['label'])


class SlowClassifier(MajorityClass):

    def _fit(self, X, y, rng, checkpoint):
        for _ in range(500):
            time.sleep(0.01)
            if checkpoint:
                checkpoint()
        super()._fit(X, y, rng, checkpoint)


class Exploding(MajorityClass):

    def _fit(self, X, y, rng, checkpoint):
        raise ZeroDivisionError("boom")


@pytest.fixture
def custom_steps():
    register_step('majority', StepRole.CLASSIFIER)(MajorityClass)
    register_step('slow', StepRole.CLASSIFIER)(SlowClassifier)
    register_step('exploding', StepRole.CLASSIFIER)(Exploding)
    yield
    for name in ('majority', 'slow', 'exploding'):
        unregister_step(name)
