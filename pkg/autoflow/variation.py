"""
Selection, crossover and mutation operators over workflow individuals.

Operators never modify their inputs: offspring are built on copies of the
parents' genotypes. An operator that leaves a parent unchanged returns that
parent object itself, so cached evaluations carry over.
"""

import itertools
import logging
import threading
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .constants import CX_STRUCT_RETRIES, StepRole, TerminalKind
from .encoding import WorkflowSpec, common_hparam_slots, hparam_slots, to_phenotype
from .exceptions import ValidationError
from .grammar.sampler import expand_symbol, random_derivation, sample_hparam_value, structural_derivation_count
from .grammar.types import DerivationTree, Grammar

logger = logging.getLogger(__name__)


class IdSequence:
    """Monotonic creation counter used to identify and tie-break individuals."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def next(self) -> int:
        with self._lock:
            return next(self._counter)


@dataclass
class Individual:
    """
    Genotype, cached phenotype and evaluation state of one workflow.

    ``fitness`` and ``predictions`` are either both set or both absent.
    """
    genotype: DerivationTree
    phenotype: WorkflowSpec
    grammar: Grammar = field(repr=False)
    id: int
    fitness: Optional[float] = None
    predictions: Optional[np.ndarray] = field(default=None, repr=False)
    timed_out: bool = False
    elapsed: float = 0.0

    @classmethod
    def from_genotype(cls, genotype: DerivationTree, grammar: Grammar, ids: IdSequence) -> 'Individual':
        return cls(genotype, to_phenotype(genotype, grammar), grammar, ids.next())

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    @property
    def key(self) -> str:
        return self.genotype.canonical()

    def record(self, result) -> None:
        """Attach an evaluation result."""
        self.fitness = result.fitness
        self.predictions = result.predictions
        self.timed_out = result.timed_out
        self.elapsed = result.elapsed

    def copy(self) -> 'Individual':
        return Individual(
            self.genotype.copy(), self.phenotype, self.grammar, self.id,
            self.fitness, self.predictions, self.timed_out, self.elapsed,
        )

    def render(self) -> str:
        return self.phenotype.render()


def random_individual(grammar: Grammar, max_der: int, rng: np.random.Generator, ids: IdSequence) -> Individual:
    return Individual.from_genotype(random_derivation(grammar, max_der, rng), grammar, ids)


def _better(a: Individual, b: Individual) -> Individual:
    if a.fitness != b.fitness:
        return a if a.fitness > b.fitness else b
    return a if a.id <= b.id else b


def select_tournament(pop: List[Individual], count: int, rng: np.random.Generator) -> List[Individual]:
    """
    Binary tournament: draw two individuals with replacement, keep the fitter.

    Fitness ties go to the lower id. Returns copies.
    """
    if not pop:
        raise ValidationError("Cannot select from an empty population", error_code='EMPTY_POPULATION')
    if any(not ind.evaluated for ind in pop):
        raise ValidationError("Tournament selection needs an evaluated population", error_code='UNEVALUATED')
    selected = []
    for _ in range(count):
        first, second = rng.integers(len(pop), size=2)
        selected.append(_better(pop[int(first)], pop[int(second)]).copy())
    return selected


def cx_struct(
    a: Individual,
    b: Individual,
    rng: np.random.Generator,
    max_der: int,
    ids: IdSequence,
    retries: int = CX_STRUCT_RETRIES,
) -> Tuple[Individual, Individual]:
    """
    Swap the subtrees under a randomly chosen non-terminal common to both parents.

    The root symbol is never chosen. Offspring over maxDer trigger a fresh
    attempt; after ``retries`` attempts the parents are returned unchanged.
    """
    grammar = a.grammar
    common = sorted((a.genotype.internal_symbols() & b.genotype.internal_symbols()) - {grammar.root})
    if not common:
        return a, b

    for attempt in range(retries):
        symbol = common[int(rng.integers(len(common)))]
        paths_a = a.genotype.find(symbol)
        paths_b = b.genotype.find(symbol)
        path_a = paths_a[int(rng.integers(len(paths_a)))]
        path_b = paths_b[int(rng.integers(len(paths_b)))]

        child_a = a.genotype.copy()
        child_b = b.genotype.copy()
        branch_a = child_a.subtree(path_a)
        branch_b = child_b.subtree(path_b)
        child_a = child_a.replace(path_a, branch_b)
        child_b = child_b.replace(path_b, branch_a)

        if structural_derivation_count(child_a) <= max_der and structural_derivation_count(child_b) <= max_der:
            return (
                Individual.from_genotype(child_a, grammar, ids),
                Individual.from_genotype(child_b, grammar, ids),
            )
        logger.debug(f"cx_struct attempt {attempt + 1} at {symbol} exceeded maxDer={max_der}")
    return a, b


def cx_hparams(a: Individual, b: Individual, rng: np.random.Generator, ids: IdSequence) -> Tuple[Individual, Individual]:
    """
    One-point crossover over the common hyper-parameter list.

    With m common pairs a cut point c is drawn in 1..m-1 and every pair from
    index c onwards swaps values. Requires m >= 2.
    """
    grammar = a.grammar
    child_a = a.genotype.copy()
    child_b = b.genotype.copy()
    pairs = common_hparam_slots(child_a, child_b, grammar)
    if len(pairs) < 2:
        raise ValidationError(
            f"cx_hparams needs at least 2 common hyper-parameters, got {len(pairs)}",
            error_code='CX_HPARAMS_PRECONDITION',
        )
    cut = int(rng.integers(1, len(pairs)))
    for slot_a, slot_b in pairs[cut:]:
        slot_a.node.value, slot_b.node.value = slot_b.node.value, slot_a.node.value
    return (
        Individual.from_genotype(child_a, grammar, ids),
        Individual.from_genotype(child_b, grammar, ids),
    )


def mut_struct(ind: Individual, max_der: int, rng: np.random.Generator, ids: IdSequence) -> Individual:
    """
    Re-derive the branch under a uniformly chosen non-terminal occurrence.

    The new branch may use maxDer minus the structural derivations outside it.
    """
    grammar = ind.grammar
    genotype = ind.genotype.copy()
    candidates = [(path, node) for path, node in genotype.iter_nodes() if not node.is_leaf]
    path, node = candidates[int(rng.integers(len(candidates)))]

    outside = structural_derivation_count(genotype) - structural_derivation_count(node)
    owner = _owner_at(genotype, path, grammar)
    branch, _ = expand_symbol(grammar, node.symbol, max_der - outside, rng, owner)
    return Individual.from_genotype(genotype.replace(path, branch), grammar, ids)


def _owner_at(tree: DerivationTree, path, grammar: Grammar) -> Optional[str]:
    """Algorithm owning the hyper-parameters of the branch at ``path``."""
    owner = None
    node = tree
    for index in path:
        for sibling in node.children[:index]:
            if sibling.is_leaf and grammar.kind_of(sibling.symbol) in (TerminalKind.PREPROCESSING, TerminalKind.CLASSIFIER):
                owner = sibling.symbol
        node = node.children[index]
    return owner


def mut_hparams(ind: Individual, rng: np.random.Generator, ids: IdSequence) -> Individual:
    """
    Resample each hyper-parameter with probability 1/P (preprocessing) or 1/C (classifier).

    P and C count the preprocessing and classifier slots. A resample may draw
    the value already bound. Returns ``ind`` itself when no slot was drawn.
    """
    grammar = ind.grammar
    genotype = ind.genotype.copy()
    slots = hparam_slots(genotype, grammar)
    n_prep = sum(1 for slot in slots if slot.role == StepRole.PREPROCESSING)
    n_clf = len(slots) - n_prep

    mutated = False
    for slot in slots:
        total = n_prep if slot.role == StepRole.PREPROCESSING else n_clf
        if rng.random() < 1.0 / total:
            slot.node.value = sample_hparam_value(grammar.domain(slot.algorithm, slot.hparam), rng)
            mutated = True
    if not mutated:
        return ind
    return Individual.from_genotype(genotype, grammar, ids)
