"""
Optimization manager: the evolutionary search loop and run orchestration.
"""

import csv
import json
import logging
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..archive import Archive
from ..config import EngineConfig, RunConfigFile, resolve_engine_config
from ..constants import (
    ENSEMBLE_FILENAME,
    GENERATIONS_COLUMNS,
    GENERATIONS_FILENAME,
    HOLDOUT_STREAM,
    MIN_COMMON_HPARAMS,
    REPORT_FILENAME,
    SCHEMA_VERSION,
    VARIATION_STREAM,
    RunMode,
    RunStatus,
    TerminationReason,
    Weighting,
)
from ..encoding import common_hparams
from ..exceptions import OptimizationError
from ..grammar import Grammar, load_grammar
from ..services.ensemble_service import Ensemble, build_ensemble
from ..services.evaluation_service import EvaluationService
from ..signals import generation_completed, run_finished, run_started
from ..utils.checksum import config_fingerprint, grammar_hash
from ..utils.datasets import Dataset, holdout_split, load_csv
from ..utils.formatters import format_duration, format_fitness
from ..utils.metrics import balanced_accuracy, loss, macro_f1
from ..utils.timing import Deadline
from ..variation import (
    IdSequence,
    Individual,
    cx_hparams,
    cx_struct,
    mut_hparams,
    mut_struct,
    random_individual,
    select_tournament,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeProfile:
    """
    Behaviour of one run mode.

    ``specific_operators`` selects the hyper-parameter-aware operators;
    otherwise crossover is always cx_struct and mutation is mut_struct with
    probability stMutProb (no mutation otherwise). ``best_single`` outputs
    the best individual ever evaluated instead of the archive.
    """
    specific_operators: bool
    best_single: bool = False
    div_weight: Optional[float] = None
    weighting: Weighting = Weighting.FITNESS


MODE_PROFILES: Dict[RunMode, ModeProfile] = {
    RunMode.FULL: ModeProfile(specific_operators=True),
    RunMode.BASIC: ModeProfile(specific_operators=False, best_single=True),
    RunMode.OP_ONLY: ModeProfile(specific_operators=True, best_single=True),
    RunMode.ENS_ONLY: ModeProfile(specific_operators=False),
    RunMode.TOP10: ModeProfile(specific_operators=False, div_weight=0.0, weighting=Weighting.UNIFORM),
    RunMode.TOP10W: ModeProfile(specific_operators=False, div_weight=0.0),
    RunMode.BEST_SINGLE: ModeProfile(specific_operators=True, best_single=True),
}


@dataclass
class GenerationStats:
    gen: int
    best_fit: float
    mean_fit: float
    archive_min_divfit: float
    elapsed_s: float

    def to_row(self) -> List[str]:
        return [str(self.gen), repr(self.best_fit), repr(self.mean_fit), repr(self.archive_min_divfit),
                f"{self.elapsed_s:.3f}"]


@dataclass
class RunReport:
    """Everything a run records besides the fitted ensemble."""
    config: Dict[str, Any]
    mode: str
    seed: int
    grammar_hash: str
    generations: List[GenerationStats] = field(default_factory=list)
    archive: List[Dict[str, Any]] = field(default_factory=list)
    termination_reason: str = TerminationReason.GENERATIONS.value
    wall_clock: float = 0.0
    evaluations: int = 0
    cache_hits: int = 0
    timeouts: int = 0
    best: Optional[Dict[str, Any]] = None
    ensemble: List[Dict[str, Any]] = field(default_factory=list)
    test_metrics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['schema_version'] = SCHEMA_VERSION
        return data


def _best_of(individuals) -> Optional[Individual]:
    evaluated = [ind for ind in individuals if ind.evaluated]
    if not evaluated:
        return None
    return max(evaluated, key=lambda ind: (ind.fitness, -ind.id))


class OptimizationEngine:
    """
    Generational search over grammar-derived workflows.

    Each generation selects parents by binary tournament, applies crossover to
    consecutive pairs and mutation to every offspring, evaluates the offspring
    and merges them with the archive. The run stops after ``max_gen``
    generations or once the wall-clock budget is spent; the budget is checked
    before every evaluation (the first one of a run always proceeds).
    """

    def __init__(self, config: EngineConfig, grammar: Grammar, train: Dataset, run_id: Optional[uuid.UUID] = None):
        self.config = config.validate()
        self.grammar = grammar
        self.train = train
        self.run_id = run_id
        self.profile = MODE_PROFILES[config.run_mode]
        div_weight = self.profile.div_weight if self.profile.div_weight is not None else config.div_weight
        self.archive = Archive(config.arch_size, div_weight)
        self.evaluator = EvaluationService(
            train,
            k=config.k_folds,
            eval_budget=config.effective_eval_budget,
            seed=config.seed,
            threads=config.threads,
            metric=config.metric,
        )
        self.rng = np.random.default_rng([config.seed, VARIATION_STREAM])
        self.ids = IdSequence()
        self.best_ever: Optional[Individual] = None
        self.timeouts = 0

    def _evaluate(self, individuals: List[Individual], deadline: Deadline) -> List[Individual]:
        """Evaluate until done or out of budget; returns the evaluated individuals."""
        def out_of_budget():
            return self.evaluator.evaluations + self.evaluator.cache_hits > 0 and deadline.expired

        pending = [ind for ind in individuals if not ind.evaluated]
        self.evaluator.evaluate_population(pending, stop=out_of_budget)
        self.timeouts += sum(1 for ind in pending if ind.timed_out)
        evaluated = [ind for ind in individuals if ind.evaluated]
        best = _best_of(evaluated + ([self.best_ever] if self.best_ever else []))
        if best is not None:
            self.best_ever = best
        return evaluated

    def _crossover(self, a: Individual, b: Individual) -> Tuple[Individual, Individual]:
        if self.profile.specific_operators and len(common_hparams(a, b)) >= MIN_COMMON_HPARAMS:
            return cx_hparams(a, b, self.rng, self.ids)
        return cx_struct(a, b, self.rng, self.config.max_der, self.ids)

    def _mutate(self, ind: Individual) -> Individual:
        if self.rng.random() < self.config.st_mut_prob:
            return mut_struct(ind, self.config.max_der, self.rng, self.ids)
        if self.profile.specific_operators:
            return mut_hparams(ind, self.rng, self.ids)
        return ind

    def _vary(self, population: List[Individual]) -> List[Individual]:
        offspring = select_tournament(population, self.config.pop_size, self.rng)
        for i in range(0, len(offspring) - 1, 2):
            if self.rng.random() < self.config.cx_prob:
                offspring[i], offspring[i + 1] = self._crossover(offspring[i], offspring[i + 1])
        return [self._mutate(ind) for ind in offspring]

    def _stats(self, gen: int, population: List[Individual], deadline: Deadline) -> GenerationStats:
        fitnesses = [ind.fitness for ind in population]
        return GenerationStats(
            gen=gen,
            best_fit=float(max(fitnesses)),
            mean_fit=float(np.mean(fitnesses)),
            archive_min_divfit=float(self.archive.min_divfit()),
            elapsed_s=deadline.elapsed if self.config.record_timings else 0.0,
        )

    def run(self) -> Tuple[Archive, RunReport]:
        cfg = self.config
        deadline = Deadline(cfg.budget)
        report = RunReport(
            config=cfg.to_dict(),
            mode=cfg.mode,
            seed=cfg.seed,
            grammar_hash=grammar_hash(self.grammar.source or ''),
        )
        logger.info(
            f"Starting {cfg.mode} run: popSize={cfg.pop_size}, maxGen={cfg.max_gen}, "
            f"budget={format_duration(cfg.budget)}, seed={cfg.seed}"
        )

        population = [random_individual(self.grammar, cfg.max_der, self.rng, self.ids) for _ in range(cfg.pop_size)]
        evaluated = self._evaluate(population, deadline)
        self.archive.update(evaluated)
        if len(evaluated) < len(population):
            report.termination_reason = TerminationReason.BUDGET.value
        else:
            for gen in range(1, cfg.max_gen + 1):
                if deadline.expired:
                    report.termination_reason = TerminationReason.BUDGET.value
                    break
                offspring = self._vary(population)
                evaluated = self._evaluate(offspring, deadline)
                self.archive.update(evaluated + self.archive.members)
                if len(evaluated) < len(offspring):
                    report.termination_reason = TerminationReason.BUDGET.value
                    break
                population = offspring
                stats = self._stats(gen, population, deadline)
                report.generations.append(stats)
                logger.info(
                    f"Generation {gen}/{cfg.max_gen}: best={format_fitness(stats.best_fit)} "
                    f"mean={format_fitness(stats.mean_fit)} archive={len(self.archive)}"
                )
                generation_completed.send(sender=self.__class__, run_id=self.run_id, record=stats)

        report.wall_clock = deadline.elapsed if cfg.record_timings else 0.0
        report.evaluations = self.evaluator.evaluations
        report.cache_hits = self.evaluator.cache_hits
        report.timeouts = self.timeouts
        report.archive = self.archive.summary()
        if self.best_ever is not None:
            report.best = {
                'id': self.best_ever.id,
                'workflow': self.best_ever.render(),
                'fitness': self.best_ever.fitness,
            }
        logger.info(
            f"Run finished ({report.termination_reason}) after {len(report.generations)} generation(s), "
            f"{report.evaluations} evaluation(s); archive holds {len(self.archive)}"
        )
        return self.archive, report

    def output_individuals(self) -> List[Individual]:
        """Individuals forming the final ensemble under this run's mode."""
        if self.profile.best_single or not len(self.archive):
            return [self.best_ever] if self.best_ever is not None and self.best_ever.fitness > 0 else []
        return self.archive.members


def run(cfg: EngineConfig, grammar: Grammar, train: Dataset) -> Tuple[Archive, RunReport]:
    """Run the search and return the final archive and report."""
    return OptimizationEngine(cfg, grammar, train).run()


def holdout_metrics(predictions: np.ndarray, test: Dataset) -> Dict[str, float]:
    return {
        'balanced_accuracy': balanced_accuracy(test.labels, predictions),
        'macro_f1': macro_f1(test.labels, predictions),
        'loss': loss(test.labels, predictions),
    }


@dataclass
class RunResult:
    report: RunReport
    ensemble: Ensemble
    archive: Archive
    output_dir: Optional[Path] = None


class OptimizationManager:
    """
    High-level manager for optimisation runs.
    Loads data, runs the engine, builds the ensemble and writes artifacts.
    """

    def __init__(self, record: bool = False):
        self.record = record

    def prepare_data(self, run_file: RunConfigFile, seed: int) -> Tuple[Dataset, Optional[Dataset]]:
        """Load the training set and the test set (or hold one out)."""
        data = load_csv(run_file.train, run_file.label)
        if run_file.test is not None:
            test = load_csv(run_file.test, run_file.label, class_names=data.class_names)
            return data, test
        return holdout_split(data, run_file.holdout_fraction, np.random.default_rng([seed, HOLDOUT_STREAM]))

    def optimize(
        self,
        cfg: EngineConfig,
        grammar: Grammar,
        train: Dataset,
        test: Optional[Dataset] = None,
        output_dir: Optional[Path] = None,
    ) -> RunResult:
        """
        Run the search, build the output ensemble and optionally write artifacts.

        Raises:
            OptimizationError: If no individual reached a positive fitness
        """
        run_id = uuid.uuid4() if self.record else None
        ghash = grammar_hash(grammar.source or '')
        run_started.send(sender=self.__class__, run_id=run_id, config=cfg, grammar_hash=ghash)
        try:
            engine = OptimizationEngine(cfg, grammar, train, run_id=run_id)
            archive, report = engine.run()
            members = engine.output_individuals()
            if not members:
                raise OptimizationError(
                    f"No admissible workflow within budget: {report.evaluations} evaluation(s), "
                    f"{report.timeouts} timeout(s), termination {report.termination_reason}",
                    error_code='NO_ADMISSIBLE_WORKFLOW',
                    details={'evaluations': report.evaluations, 'timeouts': report.timeouts,
                             'termination_reason': report.termination_reason},
                )
            ensemble = build_ensemble(
                members,
                train,
                weighting=engine.profile.weighting.value,
                seed=cfg.seed,
                metadata={'seed': cfg.seed, 'grammar_hash': ghash, 'mode': cfg.mode, 'config': cfg.to_dict(),
                          'config_hash': config_fingerprint(cfg.to_dict())},
            )
            report.ensemble = [
                {'id': m.individual_id, 'workflow': m.workflow.render(), 'fitness': m.fitness, 'weight': m.weight}
                for m in ensemble.members
            ]
            if test is not None:
                report.test_metrics = {'ensemble': holdout_metrics(ensemble.predict(test.features), test)}
                if engine.best_ever is not None:
                    best = build_ensemble([engine.best_ever], train, seed=cfg.seed)
                    report.test_metrics['best_single'] = holdout_metrics(best.predict(test.features), test)
                logger.info(
                    f"Test balanced accuracy: {report.test_metrics['ensemble']['balanced_accuracy']:.4f}"
                )
            result = RunResult(report, ensemble, archive, output_dir)
            if output_dir is not None:
                self.write_artifacts(result, output_dir)
        except Exception as e:
            logger.error(f"Run failed: {e}")
            run_finished.send(sender=self.__class__, run_id=run_id, status=RunStatus.FAILED.value,
                              report=None, error=str(e))
            raise
        run_finished.send(sender=self.__class__, run_id=run_id, status=RunStatus.COMPLETED.value,
                          report=report, error=None, output_dir=output_dir)
        return result

    def optimize_from_file(self, run_file: RunConfigFile, overrides: Optional[Dict[str, Any]] = None) -> RunResult:
        cfg = resolve_engine_config(run_file, overrides)
        grammar = load_grammar(run_file.grammar)
        train, test = self.prepare_data(run_file, cfg.seed)
        return self.optimize(cfg, grammar, train, test, output_dir=run_file.output)

    @staticmethod
    def write_artifacts(result: RunResult, output_dir: Path) -> None:
        """Write report.json, ensemble.json and generations.csv."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        (output_dir / REPORT_FILENAME).write_text(
            json.dumps(result.report.to_dict(), indent=2, sort_keys=True) + "\n", encoding='utf-8'
        )
        result.ensemble.save(output_dir / ENSEMBLE_FILENAME)
        with (output_dir / GENERATIONS_FILENAME).open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(GENERATIONS_COLUMNS)
            for stats in result.report.generations:
                writer.writerow(stats.to_row())
        logger.info(f"Artifacts written to {output_dir}")
