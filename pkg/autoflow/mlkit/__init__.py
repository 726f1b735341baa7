"""
Algorithm catalogue behind the workflow grammar's terminals.

Importing this package registers every shipped algorithm.
"""

from . import naive_bayes, neighbors, preprocessing, tree  # noqa: F401 (registration)
from .base import (
    FittedWorkflow,
    StepModel,
    fit_workflow,
    get_step_class,
    register_step,
    registered_algorithms,
    unregister_step,
)

__all__ = [
    'FittedWorkflow',
    'StepModel',
    'fit_workflow',
    'get_step_class',
    'register_step',
    'registered_algorithms',
    'unregister_step',
]
