import json

import numpy as np
import pytest

from autoflow.encoding import WorkflowSpec
from autoflow.exceptions import EnsembleError, EnsembleFormatError, ValidationError
from autoflow.services.ensemble_service import Ensemble, EnsembleMember, build_ensemble, ensemble_predict
from tests.conftest import GAUSSIAN_NB, PCA_KNN, make_individual


class Constant:
    """Stands in for a fitted workflow that always predicts one class."""

    def __init__(self, label):
        self.label = label

    def predict(self, X):
        return np.full(np.asarray(X).shape[0], self.label)


class Recorded:
    """Replays a fixed prediction vector."""

    def __init__(self, labels):
        self.labels = np.asarray(labels)

    def predict(self, X):
        return self.labels[:np.asarray(X).shape[0]]


def voting(labels_and_weights, n_classes=3):
    members = [
        EnsembleMember(WorkflowSpec(()), Constant(label), weight, weight, index)
        for index, (label, weight) in enumerate(labels_and_weights)
    ]
    return Ensemble(members, [f"c{i}" for i in range(n_classes)], n_features=2)


class TestVoting:

    def test_weighted_majority(self):
        ensemble = voting([(2, 1.0), (1, 0.4), (1, 0.4)])
        assert ensemble.predict(np.zeros((3, 2))).tolist() == [2, 2, 2]

    def test_tie_goes_to_lowest_class(self):
        ensemble = voting([(2, 0.5), (1, 0.5)])
        assert ensemble.predict(np.zeros((1, 2))).tolist() == [1]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n_samples = int(rng.integers(1, 21))
            n_classes = int(rng.integers(2, 5))
            # quarter weights make exact ties common
            votes = [
                (rng.integers(0, n_classes, n_samples), float(rng.integers(1, 5)) / 4)
                for _ in range(int(rng.integers(1, 8)))
            ]
            members = [
                EnsembleMember(WorkflowSpec(()), Recorded(labels), weight, weight, index)
                for index, (labels, weight) in enumerate(votes)
            ]
            ensemble = Ensemble(members, [f"c{i}" for i in range(n_classes)], n_features=2)
            expected = []
            for sample in range(n_samples):
                totals = {}
                for labels, weight in votes:
                    totals[int(labels[sample])] = totals.get(int(labels[sample]), 0.0) + weight
                top = max(totals.values())
                expected.append(min(label for label, total in totals.items() if total == top))
            assert ensemble_predict(ensemble, np.zeros((n_samples, 2))).tolist() == expected

    def test_feature_mismatch(self):
        with pytest.raises(ValidationError):
            voting([(0, 1.0)]).predict(np.zeros((1, 3)))


class TestBuildEnsemble:

    def test_weights_are_relative_to_best(self, grammar, ids, blobs):
        members = [
            make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.9),
            make_individual(grammar, ids, *PCA_KNN, fitness=0.45),
        ]
        ensemble = build_ensemble(members, blobs)
        assert ensemble.weights == pytest.approx([1.0, 0.5])

    def test_uniform_weights(self, grammar, ids, blobs):
        members = [
            make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.9),
            make_individual(grammar, ids, *PCA_KNN, fitness=0.45),
        ]
        assert build_ensemble(members, blobs, weighting='uniform').weights == [1.0, 1.0]

    def test_failed_refit_is_dropped(self, grammar, ids, blobs):
        broken = make_individual(
            grammar, ids, [('varianceThreshold', {'threshold': 1e6})], GAUSSIAN_NB[1], fitness=0.95,
        )
        kept = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.6)
        ensemble = build_ensemble([broken, kept], blobs)
        assert len(ensemble) == 1
        assert ensemble.weights == [1.0]

    def test_empty(self, blobs):
        with pytest.raises(EnsembleError):
            build_ensemble([], blobs)

    def test_every_refit_fails(self, grammar, ids, blobs):
        broken = make_individual(
            grammar, ids, [('varianceThreshold', {'threshold': 1e6})], GAUSSIAN_NB[1], fitness=0.95,
        )
        with pytest.raises(EnsembleError):
            build_ensemble([broken], blobs)

    def test_predicts_training_data(self, grammar, ids, blobs):
        ensemble = build_ensemble([make_individual(grammar, ids, *PCA_KNN, fitness=1.0)], blobs)
        assert np.mean(ensemble.predict(blobs.features) == blobs.labels) > 0.95


class TestPersistence:

    def test_reloaded_ensemble_predicts_the_same(self, grammar, ids, blobs, tmp_path):
        members = [
            make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.9),
            make_individual(grammar, ids, *PCA_KNN, fitness=0.8),
            make_individual(grammar, ids, [('rbfSampler', {'gamma': 0.1, 'nComponents': 30})],
                            ('randomForest', {'nEstimators': 5, 'criterion': 'gini', 'maxDepth': 4,
                                              'maxFeatures': 'sqrt'}), fitness=0.7),
        ]
        ensemble = build_ensemble(members, blobs, seed=3, metadata={'seed': 3})
        path = ensemble.save(tmp_path / 'ensemble.json')
        restored = Ensemble.load(path)
        assert restored.class_names == ensemble.class_names
        assert restored.metadata == {'seed': 3}
        assert np.array_equal(restored.predict(blobs.features), ensemble.predict(blobs.features))

    def test_unknown_schema_version(self, tmp_path):
        path = tmp_path / 'ensemble.json'
        path.write_text(json.dumps({'schema_version': 99, 'members': []}))
        with pytest.raises(EnsembleFormatError) as excinfo:
            Ensemble.load(path)
        assert excinfo.value.error_code == 'SCHEMA_VERSION'

    def test_missing_file(self, tmp_path):
        with pytest.raises(EnsembleFormatError):
            Ensemble.load(tmp_path / 'absent.json')

    def test_not_json(self, tmp_path):
        path = tmp_path / 'ensemble.json'
        path.write_text('{')
        with pytest.raises(EnsembleFormatError):
            Ensemble.load(path)
