"""
Evaluation service for workflow individuals.
Scores workflows by stratified k-fold cross-validation under a per-individual time budget.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from ..constants import DEFAULT_K_FOLDS, FOLD_STREAM, Metric
from ..exceptions import EvaluationTimeout
from ..mlkit import fit_workflow
from ..utils.datasets import Dataset
from ..utils.metrics import METRICS, loss
from ..utils.splitting import fold_pairs, stratified_kfold
from ..utils.timing import Deadline

logger = logging.getLogger(__name__)


@dataclass
class EvalResult:
    """
    Outcome of one evaluation.

    ``predictions`` are the out-of-fold predictions in training-set order.
    A timed-out or failed evaluation has fitness 0.
    """
    fitness: float
    predictions: np.ndarray
    elapsed: float
    timed_out: bool = False
    failure: Optional[str] = None

    def __post_init__(self):
        if self.timed_out:
            self.fitness = 0.0


def individual_seed(seed: int, individual_id: int) -> int:
    """Seed for the random steps of one individual's workflow, derived from (run seed, id)."""
    return int(np.random.default_rng([seed, individual_id]).integers(0, 2 ** 32))


def _failed_predictions(n_samples: int) -> np.ndarray:
    return np.zeros(n_samples, dtype=np.int64)


def cross_validate(
    workflow,
    train: Dataset,
    folds: List[np.ndarray],
    seed: int,
    deadline: Deadline,
    metric: str = Metric.BALANCED_ACCURACY.value,
) -> EvalResult:
    """
    Out-of-fold evaluation of one workflow over precomputed folds.

    Every step is fitted on the fold-train rows only. The deadline is checked
    between folds and between steps. Timeouts and step failures are folded
    into fitness 0.
    """
    predictions = np.full(train.n_samples, -1, dtype=np.int64)
    try:
        for fold_index, (train_idx, held_out) in enumerate(fold_pairs(folds)):
            deadline.check(f"before fold {fold_index}")
            fitted = fit_workflow(
                workflow,
                train.features[train_idx],
                train.labels[train_idx],
                seed=seed,
                checkpoint=deadline.check,
            )
            predictions[held_out] = fitted.predict(train.features[held_out], checkpoint=deadline.check)
        deadline.check("after last fold")
    except EvaluationTimeout as e:
        logger.warning(f"Evaluation of {workflow} timed out: {e.message}")
        return EvalResult(0.0, _failed_predictions(train.n_samples), deadline.elapsed, timed_out=True, failure=e.message)
    except Exception as e:
        # Any step failure scores 0; nothing propagates to the search loop.
        reason = getattr(e, 'message', None) or f"{type(e).__name__}: {e}"
        logger.warning(f"Evaluation of {workflow} failed: {reason}")
        return EvalResult(0.0, _failed_predictions(train.n_samples), deadline.elapsed, failure=reason)

    fitness = METRICS[metric](train.labels, predictions)
    return EvalResult(fitness, predictions, deadline.elapsed)


def evaluate_individual(ind, train: Dataset, k: int, eval_budget: Optional[float], rng: np.random.Generator) -> EvalResult:
    """
    Evaluate one individual with freshly drawn folds.

    ``rng`` draws the folds and the seed for the workflow's own random steps.
    """
    folds = stratified_kfold(train.labels, k, rng)
    seed = int(rng.integers(0, 2 ** 32))
    return cross_validate(ind.phenotype, train, folds, seed, Deadline(eval_budget))


def workflow_loss(ind, train: Dataset, valid: Dataset, seed: int = 0) -> float:
    """Validation loss: 1 - balanced accuracy of the workflow trained on ``train``."""
    fitted = fit_workflow(ind.phenotype, train.features, train.labels, seed=seed)
    return loss(valid.labels, fitted.predict(valid.features))


class EvaluationService:
    """
    Evaluates individuals against one training set.

    Folds are drawn once per run from the run seed, so every individual sees
    the same partition and prediction vectors are comparable. Each
    individual's random steps use a stream derived from (seed, id). Results
    are cached by genotype so re-created workflows are not re-fitted.
    """

    def __init__(
        self,
        train: Dataset,
        k: int = DEFAULT_K_FOLDS,
        eval_budget: Optional[float] = None,
        seed: int = 0,
        threads: int = 1,
        metric: str = Metric.BALANCED_ACCURACY.value,
    ):
        self.train = train
        self.k = k
        self.eval_budget = eval_budget
        self.seed = seed
        self.threads = max(1, int(threads))
        self.metric = metric
        self.folds = stratified_kfold(train.labels, k, np.random.default_rng([seed, FOLD_STREAM]))
        self._cache: Dict[str, EvalResult] = {}
        self._lock = threading.Lock()
        self.evaluations = 0
        self.cache_hits = 0

    def evaluate(self, ind) -> EvalResult:
        """Evaluate (or fetch from cache) and attach the result to ``ind``."""
        key = ind.key
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            with self._lock:
                self.cache_hits += 1
            ind.record(cached)
            return cached

        started = time.perf_counter()
        result = cross_validate(
            ind.phenotype, self.train, self.folds, individual_seed(self.seed, ind.id),
            Deadline(self.eval_budget), self.metric,
        )
        logger.debug(
            f"Evaluated #{ind.id} {ind.render()} -> {result.fitness:.4f} "
            f"in {time.perf_counter() - started:.2f}s"
        )
        with self._lock:
            self.evaluations += 1
            # Timeouts depend on machine load; only deterministic outcomes are cached.
            if not result.timed_out:
                self._cache[key] = result
        ind.record(result)
        return result

    def evaluate_population(self, individuals, stop: Optional[Callable[[], bool]] = None) -> int:
        """
        Evaluate every unevaluated individual in population order.

        ``stop`` is consulted before each evaluation; once it returns True no
        further individuals are started. Returns the number evaluated.
        """
        pending = [ind for ind in individuals if not ind.evaluated]
        if self.threads == 1:
            done = 0
            for ind in pending:
                if stop is not None and stop():
                    break
                self.evaluate(ind)
                done += 1
            return done

        # Submitted in waves of `threads` so `stop` is still consulted as the budget runs out.
        # Repeats of a genotype within a wave wait for its first occurrence.
        done = 0
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for start in range(0, len(pending), self.threads):
                leaders, repeats = [], []
                seen = set()
                stopped = False
                for ind in pending[start:start + self.threads]:
                    if stop is not None and stop():
                        stopped = True
                        break
                    if ind.key in seen:
                        repeats.append(ind)
                    else:
                        seen.add(ind.key)
                        leaders.append(pool.submit(self.evaluate, ind))
                for future in leaders:
                    future.result()
                for ind in repeats:
                    self.evaluate(ind)
                done += len(leaders) + len(repeats)
                if stopped:
                    break
        return done

    def score(self, predictions: np.ndarray) -> float:
        """Fitness of a prediction vector over the training labels."""
        return METRICS[self.metric](self.train.labels, predictions)
