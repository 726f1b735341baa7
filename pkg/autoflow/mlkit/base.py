"""
Uniform step interface, algorithm registry and fitted workflows.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Type

import numpy as np

from ..constants import SCHEMA_VERSION, StepRole
from ..exceptions import EnsembleFormatError, StepFailure, ValidationError

logger = logging.getLogger(__name__)

Checkpoint = Optional[Callable[[], None]]

_REGISTRY: Dict[str, Type['StepModel']] = {}


def register_step(name: str, role: StepRole):
    """
    Class decorator registering an algorithm implementation under a grammar terminal name.
    """
    def decorator(cls):
        cls.name = name
        cls.role = StepRole(role)
        _REGISTRY[name] = cls
        return cls
    return decorator


def unregister_step(name: str) -> None:
    _REGISTRY.pop(name, None)


def get_step_class(name: str) -> Type['StepModel']:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise StepFailure(f"No implementation registered for algorithm '{name}'", error_code='UNKNOWN_ALGORITHM')


def registered_algorithms() -> List[str]:
    return sorted(_REGISTRY)


class StepModel:
    """
    One fitted workflow step.

    Subclasses implement ``_fit`` plus ``_transform`` (preprocessing) or
    ``_predict`` (classifiers), and expose their fitted parameters through
    ``get_state``/``set_state`` as JSON-compatible values.
    """
    name = ''
    role = StepRole.PREPROCESSING

    def __init__(self, hparams: Optional[Dict[str, Any]] = None):
        self.hparams = dict(hparams or {})
        self.n_features_in_: Optional[int] = None

    @property
    def fitted(self) -> bool:
        return self.n_features_in_ is not None

    def fit(self, X, y=None, rng: Optional[np.random.Generator] = None, checkpoint: Checkpoint = None) -> 'StepModel':
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise StepFailure(f"{self.name}: cannot fit on input of shape {X.shape}", error_code='EMPTY_INPUT')
        rng = rng if rng is not None else np.random.default_rng(0)
        self._fit(X, None if y is None else np.asarray(y, dtype=np.int64), rng, checkpoint)
        self.n_features_in_ = X.shape[1]
        return self

    def _check_input(self, X) -> np.ndarray:
        if not self.fitted:
            raise StepFailure(f"{self.name} used before fit", error_code='NOT_FITTED')
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"{self.name} expects {self.n_features_in_} features, got {X.shape[-1] if X.ndim else 0}",
                error_code='FEATURE_MISMATCH',
            )
        return X

    def transform(self, X) -> np.ndarray:
        if self.role != StepRole.PREPROCESSING:
            raise StepFailure(f"{self.name} is not a preprocessing step", error_code='WRONG_ROLE')
        output = self._transform(self._check_input(X))
        if not np.all(np.isfinite(output)):
            raise StepFailure(f"{self.name} produced non-finite values", error_code='NON_FINITE')
        return output

    def predict(self, X) -> np.ndarray:
        if self.role != StepRole.CLASSIFIER:
            raise StepFailure(f"{self.name} is not a classifier", error_code='WRONG_ROLE')
        return self._predict(self._check_input(X)).astype(np.int64)

    def _fit(self, X, y, rng, checkpoint):
        raise NotImplementedError

    def _transform(self, X):
        raise NotImplementedError

    def _predict(self, X):
        raise NotImplementedError

    def get_state(self) -> Dict[str, Any]:
        raise NotImplementedError

    def set_state(self, state: Dict[str, Any]) -> None:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': SCHEMA_VERSION,
            'algorithm': self.name,
            'role': self.role.value,
            'hparams': dict(self.hparams),
            'n_features_in': self.n_features_in_,
            'state': self.get_state(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StepModel':
        if data.get('schema_version') != SCHEMA_VERSION:
            raise EnsembleFormatError(
                f"Unsupported step schema version {data.get('schema_version')}", error_code='SCHEMA_VERSION'
            )
        try:
            model = get_step_class(data['algorithm'])(data.get('hparams', {}))
            model.set_state(data['state'])
            model.n_features_in_ = int(data['n_features_in'])
        except (KeyError, TypeError, ValueError) as e:
            raise EnsembleFormatError(f"Malformed fitted step: {e}", error_code='ENSEMBLE_FORMAT')
        except StepFailure as e:
            raise EnsembleFormatError(e.message, error_code='ENSEMBLE_FORMAT')
        return model


def require_labels(model: StepModel, y) -> np.ndarray:
    if y is None:
        raise StepFailure(f"{model.name} needs class labels to fit", error_code='MISSING_LABELS')
    return y


class FittedWorkflow:
    """Preprocessing steps followed by one classifier, all fitted."""

    def __init__(self, steps: List[StepModel]):
        self.steps = steps

    @property
    def n_features_in(self) -> int:
        return self.steps[0].n_features_in_

    def transform(self, X, checkpoint: Checkpoint = None) -> np.ndarray:
        for step in self.steps[:-1]:
            if checkpoint:
                checkpoint()
            X = step.transform(X)
        return X

    def predict(self, X, checkpoint: Checkpoint = None) -> np.ndarray:
        X = self.transform(X, checkpoint)
        if checkpoint:
            checkpoint()
        return self.steps[-1].predict(X)

    def to_dict(self) -> List[Dict[str, Any]]:
        return [step.to_dict() for step in self.steps]

    @classmethod
    def from_dict(cls, data: List[Dict[str, Any]]) -> 'FittedWorkflow':
        return cls([StepModel.from_dict(step) for step in data])


def fit_workflow(workflow, X, y, seed: int, checkpoint: Checkpoint = None) -> FittedWorkflow:
    """
    Fit every step of a WorkflowSpec in order.

    Each step draws from its own stream ``default_rng([seed, step index])``.
    ``checkpoint`` is called between steps (and inside long-running steps).

    Raises:
        StepFailure: If a step cannot be fitted
    """
    models = []
    X = np.asarray(X, dtype=np.float64)
    for index, spec in enumerate(workflow.steps):
        if checkpoint:
            checkpoint()
        model = get_step_class(spec.algorithm)(spec.hparams)
        if model.role != spec.role:
            raise StepFailure(
                f"{spec.algorithm} is registered as {model.role.value}, used as {spec.role.value}",
                error_code='WRONG_ROLE',
            )
        model.fit(X, y, rng=np.random.default_rng([seed, index]), checkpoint=checkpoint)
        if model.role == StepRole.PREPROCESSING:
            X = model.transform(X)
        models.append(model)
    return FittedWorkflow(models)
