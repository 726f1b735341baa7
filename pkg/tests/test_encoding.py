import numpy as np
import pytest

from autoflow.constants import StepRole
from autoflow.encoding import WorkflowSpec, common_hparam_slots, hparam_slots, to_phenotype
from autoflow.exceptions import EncodingError
from autoflow.grammar import DerivationTree, random_derivation
from tests.conftest import GAUSSIAN_NB, PCA_KNN, workflow_tree


def test_pca_then_knn(grammar):
    workflow = to_phenotype(workflow_tree(*PCA_KNN), grammar)
    assert [step.algorithm for step in workflow.steps] == ['pca', 'kNN']
    assert workflow.classifier.role == StepRole.CLASSIFIER
    assert workflow.steps[0].hparams == {'whiten': False, 'nComponents': 7}
    assert workflow.classifier.hparams == {'nNeighbors': 5, 'weights': 'uniform', 'p': 2}


def test_bare_classifier(grammar):
    workflow = to_phenotype(workflow_tree(*GAUSSIAN_NB), grammar)
    assert len(workflow.steps) == 1
    assert workflow.preprocessing == ()


def test_render(grammar):
    workflow = to_phenotype(workflow_tree(*PCA_KNN), grammar)
    rendered = workflow.render()
    assert rendered.index('pca') < rendered.index('kNN')
    assert 'nComponents' in rendered


def test_dict_round_trip(grammar):
    workflow = to_phenotype(workflow_tree(*PCA_KNN), grammar)
    assert WorkflowSpec.from_dict(workflow.to_dict()) == workflow


def test_random_corpus_is_valid(grammar):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        workflow = to_phenotype(random_derivation(grammar, 13, rng), grammar)
        roles = [step.role for step in workflow.steps]
        assert roles[-1] == StepRole.CLASSIFIER
        assert StepRole.CLASSIFIER not in roles[:-1]
        assert 1 <= len(roles) <= 6
        for step in workflow.steps:
            for name, value in step.hparams.items():
                assert grammar.domain(step.algorithm, name).contains(value)


def test_unbound_hparam_is_an_encoding_error(grammar):
    tree = workflow_tree(*GAUSSIAN_NB)
    tree.children[0].children[1].children[0].owner = 'kNN'
    with pytest.raises(EncodingError):
        to_phenotype(tree, grammar)


def test_classifier_must_be_last(grammar):
    tree = DerivationTree('<workflow>', alternative=1, structural=True, children=[
        DerivationTree('<preprocess>', alternative=3, structural=True, children=[DerivationTree('minMaxScaler')]),
    ])
    with pytest.raises(EncodingError):
        to_phenotype(tree, grammar)


class TestCommonHparams:

    def test_pca_knn_pairs(self, grammar):
        pairs = common_hparam_slots(workflow_tree(*PCA_KNN), workflow_tree(*PCA_KNN), grammar)
        assert [(a.algorithm, a.hparam) for a, _ in pairs] == [
            ('pca', 'whiten'), ('pca', 'nComponents'), ('kNN', 'nNeighbors'), ('kNN', 'weights'), ('kNN', 'p'),
        ]

    def test_disjoint_algorithms(self, grammar):
        pairs = common_hparam_slots(workflow_tree(*PCA_KNN), workflow_tree(*GAUSSIAN_NB), grammar)
        assert pairs == []

    def test_repeated_algorithm_matches_first_occurrence(self, grammar):
        clf = ('gaussianNB', {'varSmoothing': 1e-9})
        a = workflow_tree([('normalizer', {'norm': 'l1'}), ('normalizer', {'norm': 'max'})], clf)
        b = workflow_tree([('normalizer', {'norm': 'l2'})], ('bernouilliNB', {'alpha': 1.0, 'fitPrior': True}))
        pairs = common_hparam_slots(a, b, grammar)
        assert len(pairs) == 1
        slot_a, slot_b = pairs[0]
        assert (slot_a.hparam, slot_a.node.value, slot_a.step_index) == ('norm', 'l1', 0)
        assert slot_b.node.value == 'l2'

    def test_slots_follow_workflow_order(self, grammar):
        slots = hparam_slots(workflow_tree(*PCA_KNN), grammar)
        assert [slot.step_index for slot in slots] == [0, 0, 1, 1, 1]
        assert [slot.role for slot in slots][-1] == StepRole.CLASSIFIER
