"""
Utility modules for datasets, metrics and formatting.
"""

from .checksum import config_fingerprint, grammar_hash
from .datasets import Dataset, holdout_split, load_csv, write_csv
from .formatters import format_duration, format_fitness, format_workflow
from .metrics import balanced_accuracy, confusion_matrix, loss, macro_f1
from .splitting import stratified_kfold
from .timing import Deadline

__all__ = [
    'Dataset',
    'Deadline',
    'balanced_accuracy',
    'config_fingerprint',
    'confusion_matrix',
    'format_duration',
    'format_fitness',
    'format_workflow',
    'grammar_hash',
    'holdout_split',
    'load_csv',
    'loss',
    'macro_f1',
    'stratified_kfold',
    'write_csv',
]
