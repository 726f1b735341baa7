"""
Diversity-weighted elite archive.

Members are ranked by ``divfit = divWeight * div + (1 - divWeight) * fitness``,
where ``div`` is the mean fraction of training samples on which a member's
out-of-fold predictions disagree with the other members'.
"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .constants import DEFAULT_ARCH_SIZE, DEFAULT_DIV_WEIGHT
from .exceptions import ArchiveError, ValidationError
from .variation import Individual

logger = logging.getLogger(__name__)


def disagreement(x: Sequence[int], y: Sequence[int]) -> float:
    """Fraction of samples on which two prediction vectors differ."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValidationError(
            f"Prediction vectors differ in length: {x.size} vs {y.size}", error_code='LENGTH_MISMATCH'
        )
    if x.size == 0:
        return 0.0
    return float(np.count_nonzero(x != y)) / x.size


def divfit(div: float, fitness: float, div_weight: float) -> float:
    return div_weight * div + (1.0 - div_weight) * fitness


@dataclass
class ArchiveEntry:
    individual: Individual
    div: float
    divfit: float

    @property
    def sort_key(self) -> Tuple[float, float, int]:
        return (-self.divfit, -self.individual.fitness, self.individual.id)

    @property
    def identity(self) -> Tuple[str, bytes]:
        return _identity(self.individual)

    def to_dict(self) -> Dict:
        return {
            'id': self.individual.id,
            'workflow': self.individual.render(),
            'fitness': self.individual.fitness,
            'div': self.div,
            'divfit': self.divfit,
        }


def _identity(ind: Individual) -> Tuple[str, bytes]:
    workflow = json.dumps(ind.phenotype.to_dict(), sort_keys=True)
    return workflow, np.asarray(ind.predictions, dtype=np.int64).tobytes()


class Archive:
    """
    Sorted, capacity-bounded set of evaluated individuals.

    Order is divfit descending, then fitness descending, then id ascending.
    Only individuals with fitness > 0 are admitted, and a candidate with the
    same workflow and the same predictions as a member is skipped.
    """

    def __init__(self, capacity: int = DEFAULT_ARCH_SIZE, div_weight: float = DEFAULT_DIV_WEIGHT):
        if capacity < 1:
            raise ArchiveError(f"Archive capacity must be positive. Got: {capacity}", error_code='INVALID_CAPACITY')
        if not 0.0 <= div_weight <= 1.0:
            raise ArchiveError(f"divWeight must be in [0, 1]. Got: {div_weight}", error_code='INVALID_DIV_WEIGHT')
        self.capacity = capacity
        self.div_weight = div_weight
        self.entries: List[ArchiveEntry] = []

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return (entry.individual for entry in self.entries)

    @property
    def members(self) -> List[Individual]:
        return [entry.individual for entry in self.entries]

    def div_member(self, index: int) -> float:
        """Mean disagreement of member ``index`` with every other member (0 for a singleton)."""
        if not 0 <= index < len(self.entries):
            raise ArchiveError(f"No archive member at index {index}", error_code='INVALID_INDEX')
        if len(self.entries) < 2:
            return 0.0
        own = self.entries[index].individual.predictions
        total = sum(
            disagreement(own, entry.individual.predictions)
            for other, entry in enumerate(self.entries) if other != index
        )
        return total / (len(self.entries) - 1)

    def div_candidate(self, candidate: Individual) -> float:
        """Mean disagreement of a non-member with every member."""
        if not self.entries:
            raise ArchiveError("div_candidate needs a non-empty archive", error_code='EMPTY_ARCHIVE')
        total = sum(disagreement(candidate.predictions, entry.individual.predictions) for entry in self.entries)
        return total / len(self.entries)

    def _admissible(self, candidates: Iterable[Individual]) -> List[Individual]:
        seen = {entry.identity for entry in self.entries}
        admitted = []
        for ind in candidates:
            if not ind.evaluated:
                raise ArchiveError(f"Individual #{ind.id} is not evaluated", error_code='UNEVALUATED')
            if ind.fitness <= 0:
                continue
            identity = _identity(ind)
            if identity in seen:
                continue
            seen.add(identity)
            admitted.append(ind)
        return admitted

    def update(self, candidates: Iterable[Individual]) -> int:
        """
        Merge evaluated candidates into the archive.

        On the first fill the best ``capacity`` candidates by fitness are
        taken and every member's divfit is computed against the others.
        Afterwards each candidate is scored against the archive as it stood
        when the call began; incumbents keep their cached divfit.

        Returns:
            Number of candidates that are members after the update
        """
        admitted = self._admissible(candidates)
        if not admitted:
            return 0

        if not self.entries:
            admitted.sort(key=lambda ind: (-ind.fitness, ind.id))
            self.entries = [ArchiveEntry(ind, 0.0, 0.0) for ind in admitted[:self.capacity]]
            for index, entry in enumerate(self.entries):
                entry.div = self.div_member(index)
            for entry in self.entries:
                entry.divfit = divfit(entry.div, entry.individual.fitness, self.div_weight)
            self.entries.sort(key=lambda entry: entry.sort_key)
            logger.info(f"Archive filled with {len(self.entries)} members")
            return len(self.entries)

        fresh = []
        for ind in admitted:
            div = self.div_candidate(ind)
            fresh.append(ArchiveEntry(ind, div, divfit(div, ind.fitness, self.div_weight)))
        merged = sorted(self.entries + fresh, key=lambda entry: entry.sort_key)
        self.entries = merged[:self.capacity]
        kept = {id(entry) for entry in self.entries}
        return sum(1 for entry in fresh if id(entry) in kept)

    def min_divfit(self) -> float:
        return self.entries[-1].divfit if self.entries else 0.0

    def best(self) -> Individual:
        if not self.entries:
            raise ArchiveError("Archive is empty", error_code='EMPTY_ARCHIVE')
        return max(self.members, key=lambda ind: (ind.fitness, -ind.id))

    def summary(self) -> List[Dict]:
        return [entry.to_dict() for entry in self.entries]
