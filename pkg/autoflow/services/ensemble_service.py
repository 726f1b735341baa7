"""
Ensemble service.
Refits archived workflows on the full training set, combines them by weighted
majority vote and persists the result as JSON.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from ..constants import SCHEMA_VERSION, Weighting
from ..encoding import WorkflowSpec
from ..exceptions import EnsembleError, EnsembleFormatError, ValidationError
from ..mlkit import FittedWorkflow, fit_workflow
from ..utils.datasets import Dataset
from .evaluation_service import individual_seed

logger = logging.getLogger(__name__)


@dataclass
class EnsembleMember:
    workflow: WorkflowSpec
    fitted: FittedWorkflow
    fitness: float
    weight: float
    individual_id: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.individual_id,
            'workflow': self.workflow.to_dict(),
            'rendered': self.workflow.render(),
            'fitness': self.fitness,
            'weight': self.weight,
            'steps': self.fitted.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EnsembleMember':
        return cls(
            workflow=WorkflowSpec.from_dict(data['workflow']),
            fitted=FittedWorkflow.from_dict(data['steps']),
            fitness=float(data['fitness']),
            weight=float(data['weight']),
            individual_id=data.get('id'),
        )


@dataclass
class Ensemble:
    """
    Weighted majority vote over fitted workflows.

    Each member votes its predicted class with its weight; the class with the
    largest summed weight wins and ties go to the lowest class id.
    """
    members: List[EnsembleMember]
    class_names: List[str]
    n_features: int
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    @property
    def weights(self) -> List[float]:
        return [member.weight for member in self.members]

    def votes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValidationError(
                f"Ensemble expects {self.n_features} features, got {X.shape[-1] if X.ndim else 0}",
                error_code='FEATURE_MISMATCH',
            )
        totals = np.zeros((X.shape[0], len(self.class_names)))
        rows = np.arange(X.shape[0])
        for member in self.members:
            np.add.at(totals, (rows, member.fitted.predict(X)), member.weight)
        return totals

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': SCHEMA_VERSION,
            'class_names': list(self.class_names),
            'n_features': self.n_features,
            'metadata': self.metadata,
            'members': [member.to_dict() for member in self.members],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Ensemble':
        if data.get('schema_version') != SCHEMA_VERSION:
            raise EnsembleFormatError(
                f"Unsupported ensemble schema version {data.get('schema_version')}", error_code='SCHEMA_VERSION'
            )
        try:
            members = [EnsembleMember.from_dict(member) for member in data['members']]
            ensemble = cls(members, list(data['class_names']), int(data['n_features']), dict(data.get('metadata', {})))
        except (KeyError, TypeError, ValueError) as e:
            raise EnsembleFormatError(f"Malformed ensemble document: {e}", error_code='ENSEMBLE_FORMAT')
        if not members:
            raise EnsembleFormatError("Ensemble document has no members", error_code='ENSEMBLE_FORMAT')
        return ensemble

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding='utf-8')
        return path

    @classmethod
    def load(cls, path) -> 'Ensemble':
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except FileNotFoundError:
            raise EnsembleFormatError(f"Ensemble file {path} not found", error_code='ENSEMBLE_NOT_FOUND')
        except json.JSONDecodeError as e:
            raise EnsembleFormatError(f"{path} is not valid JSON: {e}", error_code='ENSEMBLE_FORMAT')
        return cls.from_dict(data)


def build_ensemble(
    individuals: Iterable,
    train: Dataset,
    weighting: str = Weighting.FITNESS.value,
    seed: int = 0,
    metadata: Optional[Dict[str, Any]] = None,
) -> Ensemble:
    """
    Refit every individual's workflow on the whole training set.

    Members whose refit fails are dropped with a warning. Weights are
    fitness / best surviving fitness, or 1 for uniform weighting.

    Raises:
        EnsembleError: If there is nothing to build from or every refit fails
    """
    individuals = list(individuals)
    if not individuals:
        raise EnsembleError("Cannot build an ensemble from an empty archive", error_code='EMPTY_ARCHIVE')

    fitted_members = []
    for ind in individuals:
        try:
            fitted = fit_workflow(ind.phenotype, train.features, train.labels, seed=individual_seed(seed, ind.id))
        except Exception as e:
            reason = getattr(e, 'message', None) or f"{type(e).__name__}: {e}"
            logger.warning(f"Dropping ensemble member #{ind.id} {ind.render()}: refit failed ({reason})")
            continue
        fitted_members.append((ind, fitted))

    if not fitted_members:
        raise EnsembleError(
            f"All {len(individuals)} ensemble members failed to refit", error_code='ALL_MEMBERS_FAILED'
        )

    best = max(ind.fitness for ind, _ in fitted_members)
    members = []
    for ind, fitted in fitted_members:
        weight = 1.0 if weighting == Weighting.UNIFORM.value or best <= 0 else ind.fitness / best
        members.append(EnsembleMember(ind.phenotype, fitted, float(ind.fitness), float(weight), ind.id))

    logger.info(f"Built ensemble of {len(members)} member(s) ({weighting} weights)")
    return Ensemble(members, list(train.class_names), train.n_features, dict(metadata or {}))


def ensemble_predict(ensemble: Ensemble, X) -> np.ndarray:
    return ensemble.predict(X)
