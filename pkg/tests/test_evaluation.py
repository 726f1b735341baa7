import numpy as np
import pytest

from autoflow.constants import StepRole
from autoflow.encoding import StepSpec, WorkflowSpec
from autoflow.services.evaluation_service import (
    EvalResult,
    EvaluationService,
    cross_validate,
    evaluate_individual,
    individual_seed,
    workflow_loss,
)
from autoflow.utils.splitting import stratified_kfold
from autoflow.utils.timing import Deadline
from autoflow.variation import Individual
from tests.conftest import GAUSSIAN_NB, PCA_KNN, gaussian_blobs, make_individual, workflow_tree


def single_step(name):
    return WorkflowSpec((StepSpec(name, StepRole.CLASSIFIER, {}),))


def folds_for(data, k=5, seed=0):
    return stratified_kfold(data.labels, k, np.random.default_rng(seed))


class TestCrossValidate:

    def test_majority_class_on_balanced_data(self, custom_steps, blobs):
        result = cross_validate(single_step('majority'), blobs, folds_for(blobs), 0, Deadline(None))
        assert result.fitness == pytest.approx(0.5)
        assert not result.timed_out

    def test_predictions_are_out_of_fold(self, custom_steps):
        data = gaussian_blobs(n_per_class=10)
        result = cross_validate(single_step('majority'), data, folds_for(data), 0, Deadline(None))
        assert result.predictions.shape == (20,)
        assert set(result.predictions.tolist()) <= {0, 1}

    def test_separable_data_scores_high(self, grammar, ids, blobs):
        ind = make_individual(grammar, ids, *PCA_KNN)
        result = cross_validate(ind.phenotype, blobs, folds_for(blobs), 1, Deadline(None))
        assert result.fitness > 0.95

    def test_timeout_scores_zero(self, custom_steps, blobs):
        result = cross_validate(single_step('slow'), blobs, folds_for(blobs), 0, Deadline(0.05))
        assert result.timed_out
        assert result.fitness == 0.0
        assert result.elapsed < 5.0

    def test_step_failure_scores_zero(self, custom_steps, blobs):
        result = cross_validate(single_step('exploding'), blobs, folds_for(blobs), 0, Deadline(None))
        assert result.fitness == 0.0
        assert not result.timed_out
        assert 'boom' in result.failure

    def test_macro_f1_metric(self, custom_steps, blobs):
        result = cross_validate(single_step('majority'), blobs, folds_for(blobs), 0, Deadline(None), 'macro_f1')
        assert result.fitness == pytest.approx(1 / 3)


def test_timed_out_result_forces_zero_fitness():
    assert EvalResult(0.9, np.zeros(3), 1.0, timed_out=True).fitness == 0.0


def test_individual_seed_is_stable():
    assert individual_seed(3, 10) == individual_seed(3, 10)
    assert individual_seed(3, 10) != individual_seed(3, 11)


def test_evaluate_individual(grammar, ids, blobs, rng):
    ind = make_individual(grammar, ids, *GAUSSIAN_NB)
    result = evaluate_individual(ind, blobs, 5, None, rng)
    assert 0.9 < result.fitness <= 1.0


def test_workflow_loss(grammar, ids):
    ind = make_individual(grammar, ids, *GAUSSIAN_NB)
    train = gaussian_blobs(seed=4)
    valid = gaussian_blobs(seed=5)
    assert workflow_loss(ind, train, valid) < 0.1


class TestEvaluationService:

    def test_attaches_result(self, grammar, ids, blobs):
        service = EvaluationService(blobs, k=3, seed=1)
        ind = make_individual(grammar, ids, *GAUSSIAN_NB)
        result = service.evaluate(ind)
        assert ind.fitness == result.fitness
        assert np.array_equal(ind.predictions, result.predictions)
        assert service.evaluations == 1

    def test_same_genotype_hits_cache(self, grammar, ids, blobs):
        service = EvaluationService(blobs, k=3, seed=1)
        first = make_individual(grammar, ids, *PCA_KNN)
        second = make_individual(grammar, ids, *PCA_KNN)
        service.evaluate(first)
        service.evaluate(second)
        assert service.evaluations == 1
        assert service.cache_hits == 1
        assert second.fitness == first.fitness

    def test_timeouts_are_not_cached(self, custom_steps, grammar, ids, blobs):
        service = EvaluationService(blobs, k=3, eval_budget=0.05, seed=1)
        genotype = workflow_tree(*GAUSSIAN_NB)
        for _ in range(2):
            ind = Individual(genotype.copy(), single_step('slow'), grammar, ids.next())
            service.evaluate(ind)
            assert ind.timed_out
        assert service.evaluations == 2
        assert service.cache_hits == 0

    def test_folds_are_fixed_per_seed(self, blobs):
        a = EvaluationService(blobs, k=4, seed=9).folds
        b = EvaluationService(blobs, k=4, seed=9).folds
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_threaded_matches_sequential(self, grammar, ids, blobs):
        specs = [GAUSSIAN_NB, PCA_KNN, ([], ('decisionTree', {'criterion': 'gini', 'maxDepth': 3, 'maxFeatures': 'all'}))]
        sequential = [make_individual(grammar, ids, *spec) for spec in specs]
        threaded = [ind.copy() for ind in sequential]
        EvaluationService(blobs, k=3, seed=2).evaluate_population(sequential)
        done = EvaluationService(blobs, k=3, seed=2, threads=3).evaluate_population(threaded)
        assert done == 3
        for a, b in zip(sequential, threaded):
            assert a.fitness == b.fitness
            assert np.array_equal(a.predictions, b.predictions)

    def test_repeated_genotype_in_one_wave_matches_sequential(self, grammar, ids, blobs):
        stochastic = (
            [('rbfSampler', {'gamma': 0.1, 'nComponents': 40})],
            ('randomForest', {'nEstimators': 10, 'criterion': 'gini', 'maxDepth': 4, 'maxFeatures': 'sqrt'}),
        )
        sequential = [make_individual(grammar, ids, *stochastic) for _ in range(2)]
        threaded = [ind.copy() for ind in sequential]
        EvaluationService(blobs, k=3, seed=1).evaluate_population(sequential)
        service = EvaluationService(blobs, k=3, seed=1, threads=2)
        assert service.evaluate_population(threaded) == 2
        assert service.evaluations == 1
        assert service.cache_hits == 1
        for a, b in zip(sequential, threaded):
            assert a.fitness == b.fitness
            assert np.array_equal(a.predictions, b.predictions)
        assert threaded[1].fitness == threaded[0].fitness

    @pytest.mark.parametrize('threads', [1, 2])
    def test_stop_prevents_new_evaluations(self, grammar, ids, blobs, threads):
        service = EvaluationService(blobs, k=3, seed=2, threads=threads)
        population = [make_individual(grammar, ids, *GAUSSIAN_NB) for _ in range(4)]
        calls = []

        def stop():
            calls.append(1)
            return len(calls) > 1

        assert service.evaluate_population(population, stop=stop) == 1
        assert population[0].evaluated
        assert not population[-1].evaluated

    def test_evaluated_individuals_are_skipped(self, grammar, ids, blobs):
        service = EvaluationService(blobs, k=3, seed=2)
        ind = make_individual(grammar, ids, *GAUSSIAN_NB, fitness=0.7, predictions=np.zeros(blobs.n_samples))
        assert service.evaluate_population([ind]) == 0
        assert ind.fitness == 0.7
