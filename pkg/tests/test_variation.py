import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autoflow.encoding import common_hparams, to_phenotype
from autoflow.exceptions import ValidationError
from autoflow.grammar import DerivationTree, parse_grammar, tree_violations
from autoflow.variation import (
    IdSequence,
    Individual,
    cx_hparams,
    cx_struct,
    mut_hparams,
    mut_struct,
    random_individual,
    select_tournament,
)
from tests.conftest import GAUSSIAN_NB, PCA_KNN, make_individual

NO_HPARAMS = """
%structural <workflow> <classifier>
%classifiers <classifier>
<workflow> ::= minMaxScaler <classifier>
<classifier> ::= gaussianNB
"""


class FixedDraws:
    """Stand-in generator replaying fixed integer draws."""

    def __init__(self, draws):
        self.draws = list(draws)

    def integers(self, low, high=None, size=None):
        if size is None:
            return self.draws.pop(0)
        return np.asarray([self.draws.pop(0) for _ in range(size)])


class TestTournament:

    def test_fitter_wins(self, grammar, ids):
        a = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.9)
        b = make_individual(grammar, ids, *PCA_KNN, fitness=0.1)
        winner, = select_tournament([a, b], 1, FixedDraws([0, 1]))
        assert winner.id == a.id
        assert winner is not a

    def test_tie_goes_to_lower_id(self, grammar, ids):
        a = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.5)
        b = make_individual(grammar, ids, *PCA_KNN, fitness=0.5)
        winner, = select_tournament([b, a], 1, FixedDraws([0, 1]))
        assert winner.id == a.id

    def test_single_individual(self, grammar, ids, rng):
        a = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.3)
        assert [ind.id for ind in select_tournament([a], 5, rng)] == [a.id] * 5

    def test_unevaluated_population_is_rejected(self, grammar, ids, rng):
        with pytest.raises(ValidationError):
            select_tournament([make_individual(grammar, ids, *GAUSSIAN_NB)], 1, rng)

    def test_rank_probabilities(self, grammar, ids):
        n = 100
        template = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.0)
        population = []
        for rank in range(1, n + 1):
            ind = template.copy()
            ind.id = rank
            ind.fitness = 1.0 - rank / (n + 1)
            population.append(ind)
        draws = 10_000
        counts = np.zeros(n + 1)
        for winner in select_tournament(population, draws, np.random.default_rng(5)):
            counts[winner.id] += 1
        for rank in (1, 10, 50, 100):
            p = (2 * (n - rank) + 1) / n ** 2
            sigma = math.sqrt(draws * p * (1 - p))
            assert abs(counts[rank] - draws * p) <= 3 * sigma + 1


class TestCxStruct:

    def test_identical_parents(self, grammar, ids, rng):
        a = make_individual(grammar, ids, *PCA_KNN)
        b = make_individual(grammar, ids, *PCA_KNN)
        child_a, child_b = cx_struct(a, b, rng, 13, ids)
        assert child_a.key == a.key
        assert child_b.key == b.key

    def test_inputs_are_not_modified(self, grammar, ids, rng):
        a = make_individual(grammar, ids, *PCA_KNN)
        b = make_individual(grammar, ids, *GAUSSIAN_NB)
        before = (a.key, b.key)
        cx_struct(a, b, rng, 13, ids)
        assert (a.key, b.key) == before

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_children_are_valid(self, grammar, seed):
        rng = np.random.default_rng(seed)
        ids = IdSequence()
        a = random_individual(grammar, 13, rng, ids)
        b = random_individual(grammar, 13, rng, ids)
        for child in cx_struct(a, b, rng, 13, ids):
            assert tree_violations(child.genotype, grammar, 13) == []


class TestCxHparams:

    def test_cut_two_swaps_last_three(self, grammar, ids):
        a = make_individual(grammar, ids, *PCA_KNN)
        b = make_individual(
            grammar, ids,
            [('pca', {'whiten': True, 'nComponents': 3})],
            ('kNN', {'nNeighbors': 9, 'weights': 'distance', 'p': 1}),
        )
        child_a, child_b = cx_hparams(a, b, FixedDraws([2]), ids)
        assert child_a.phenotype.steps[0].hparams == {'whiten': False, 'nComponents': 7}
        assert child_a.phenotype.classifier.hparams == {'nNeighbors': 9, 'weights': 'distance', 'p': 1}
        assert child_b.phenotype.steps[0].hparams == {'whiten': True, 'nComponents': 3}
        assert child_b.phenotype.classifier.hparams == {'nNeighbors': 5, 'weights': 'uniform', 'p': 2}

    def test_two_pairs_always_swap_the_second(self, grammar, ids, rng):
        a = make_individual(grammar, ids, [], ('bernouilliNB', {'alpha': 1.0, 'fitPrior': True}))
        b = make_individual(grammar, ids, [], ('bernouilliNB', {'alpha': 2.0, 'fitPrior': False}))
        for _ in range(20):
            child_a, _ = cx_hparams(a, b, rng, ids)
            assert child_a.phenotype.classifier.hparams == {'alpha': 1.0, 'fitPrior': False}

    def test_identical_values(self, grammar, ids, rng):
        a = make_individual(grammar, ids, *PCA_KNN)
        b = make_individual(grammar, ids, *PCA_KNN)
        child_a, child_b = cx_hparams(a, b, rng, ids)
        assert child_a.key == a.key and child_b.key == b.key

    def test_needs_two_common_hparams(self, grammar, ids, rng):
        a = make_individual(grammar, ids, *GAUSSIAN_NB)
        b = make_individual(grammar, ids, *GAUSSIAN_NB)
        with pytest.raises(ValidationError):
            cx_hparams(a, b, rng, ids)

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_children_are_valid(self, grammar, seed):
        rng = np.random.default_rng(seed)
        ids = IdSequence()
        a = random_individual(grammar, 13, rng, ids)
        b = random_individual(grammar, 13, rng, ids)
        for first, second in ((a, b), (a, mut_hparams(a, rng, ids))):
            if len(common_hparams(first, second)) < 2:
                continue
            for child in cx_hparams(first, second, rng, ids):
                assert tree_violations(child.genotype, grammar, 13) == []
                assert child.phenotype.render() == to_phenotype(child.genotype, grammar).render()


class TestMutStruct:

    def test_budget_two_gives_bare_classifier(self, grammar, ids):
        ind = make_individual(grammar, ids, *GAUSSIAN_NB)
        rng = np.random.default_rng(0)
        for _ in range(50):
            child = mut_struct(ind, 2, rng, ids)
            assert len(child.phenotype.steps) == 1
            assert tree_violations(child.genotype, grammar, 2) == []

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_mutants_are_valid(self, grammar, seed):
        rng = np.random.default_rng(seed)
        ids = IdSequence()
        ind = random_individual(grammar, 13, rng, ids)
        mutant = mut_struct(ind, 13, rng, ids)
        assert tree_violations(mutant.genotype, grammar, 13) == []


class TestMutHparams:

    def test_no_slots_is_identity(self, ids, rng):
        grammar = parse_grammar(NO_HPARAMS)
        ind = Individual.from_genotype(
            DerivationTree('<workflow>', alternative=0, structural=True, children=[
                DerivationTree('minMaxScaler'),
                DerivationTree('<classifier>', alternative=0, structural=True, children=[DerivationTree('gaussianNB')]),
            ]),
            grammar, ids,
        )
        assert mut_hparams(ind, rng, ids) is ind

    def test_two_preprocessing_slots_mutate_half_the_time(self, grammar, ids):
        ind = make_individual(grammar, ids, *PCA_KNN)
        rng = np.random.default_rng(2)
        trials = 4000
        changed = 0
        for _ in range(trials):
            mutant = mut_hparams(ind, rng, ids)
            changed += mutant.phenotype.steps[0].hparams['nComponents'] != 7
        # a resample may redraw the bound value (1 in 50 for nComponents)
        p = 0.5 * 49 / 50
        assert abs(changed - trials * p) <= 3 * math.sqrt(trials * p * (1 - p))

    def test_per_slot_frequency_with_four_preprocessing_slots(self, grammar, ids):
        ind = make_individual(
            grammar, ids,
            [('pca', {'whiten': False, 'nComponents': 7}), ('rbfSampler', {'gamma': 0.5, 'nComponents': 100})],
            ('gaussianNB', {'varSmoothing': 1e-9}),
        )
        rng = np.random.default_rng(4)
        trials = 10_000
        changed = 0
        for _ in range(trials):
            changed += mut_hparams(ind, rng, ids).phenotype.steps[1].hparams['gamma'] != 0.5
        p = 0.25
        assert abs(changed - trials * p) <= 3 * math.sqrt(trials * p * (1 - p))

    def test_parent_is_not_modified(self, grammar, ids, rng):
        ind = make_individual(grammar, ids, *PCA_KNN)
        key = ind.key
        for _ in range(20):
            mut_hparams(ind, rng, ids)
        assert ind.key == key

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_mutants_are_valid(self, grammar, seed):
        rng = np.random.default_rng(seed)
        ids = IdSequence()
        ind = random_individual(grammar, 13, rng, ids)
        for _ in range(5):
            ind = mut_hparams(ind, rng, ids)
            assert tree_violations(ind.genotype, grammar, 13) == []
            assert ind.phenotype.render() == to_phenotype(ind.genotype, grammar).render()
