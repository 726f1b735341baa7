"""
Service modules for workflow evaluation and ensembles.
"""

from .ensemble_service import Ensemble, EnsembleMember, build_ensemble, ensemble_predict
from .evaluation_service import EvalResult, EvaluationService, cross_validate, evaluate_individual, workflow_loss

__all__ = [
    'Ensemble',
    'EnsembleMember',
    'EvalResult',
    'EvaluationService',
    'build_ensemble',
    'cross_validate',
    'ensemble_predict',
    'evaluate_individual',
    'workflow_loss',
]
