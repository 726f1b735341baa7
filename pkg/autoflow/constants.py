"""
Constants and enums for workflow optimisation.
"""

from enum import Enum
from pathlib import Path


class StepRole(str, Enum):
    """Role of an algorithm inside a workflow."""
    PREPROCESSING = "preprocessing"
    CLASSIFIER = "classifier"


class TerminalKind(str, Enum):
    """Tag carried by every terminal symbol of a grammar."""
    PREPROCESSING = "preprocessing"
    CLASSIFIER = "classifier"
    HPARAM = "hparam"


class HParamKind(str, Enum):
    """Hyper-parameter domain kinds."""
    INTEGER = "int"
    REAL = "real"
    CATEGORICAL = "cat"
    BOOLEAN = "bool"


class RunMode(str, Enum):
    """Optimisation modes (the full method and its ablation variants)."""
    FULL = "full"
    BASIC = "basic"
    OP_ONLY = "op_only"
    ENS_ONLY = "ens_only"
    TOP10 = "top10"
    TOP10W = "top10w"
    BEST_SINGLE = "best_single"


class Weighting(str, Enum):
    """Ensemble vote weighting schemes."""
    FITNESS = "fitness"
    UNIFORM = "uniform"


class TerminationReason(str, Enum):
    """Why the main loop stopped."""
    GENERATIONS = "generations"
    BUDGET = "budget"


class RunStatus(str, Enum):
    """Run registry statuses."""
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


class Metric(str, Enum):
    """Metrics exposed by the CLI."""
    BALANCED_ACCURACY = "balanced_accuracy"
    MACRO_F1 = "macro_f1"


# Engine defaults
DEFAULT_MAX_GEN = 100
DEFAULT_POP_SIZE = 100
DEFAULT_CX_PROB = 0.8
DEFAULT_ST_MUT_PROB = 0.2
DEFAULT_MAX_DER = 13
DEFAULT_ARCH_SIZE = 10
DEFAULT_DIV_WEIGHT = 0.2
DEFAULT_BUDGET = 3600.0  # seconds
EVAL_BUDGET_FRACTION = 0.1  # evalBudget = budget / 10 unless given
DEFAULT_K_FOLDS = 5
DEFAULT_SEED = 0
DEFAULT_THREADS = 1
DEFAULT_HOLDOUT_FRACTION = 1 / 3

# Variation
CX_STRUCT_RETRIES = 10
MIN_COMMON_HPARAMS = 2

# Random stream tags mixed with the run seed
FOLD_STREAM = 0xF01D
VARIATION_STREAM = 0x5EED
HOLDOUT_STREAM = 0x401D

# Grammar file format
GRAMMAR_ROOT_DIRECTIVE = "%root"
GRAMMAR_STRUCTURAL_DIRECTIVE = "%structural"
GRAMMAR_CLASSIFIERS_DIRECTIVE = "%classifiers"
GRAMMAR_DOMAINS_DIRECTIVE = "%domains"
DEFAULT_CLASSIFIER_SYMBOL = "<classifier>"
DEFAULT_GRAMMAR_PATH = Path(__file__).resolve().parent / "grammars" / "workflow.bnf"

# Artifacts
REPORT_FILENAME = "report.json"
ENSEMBLE_FILENAME = "ensemble.json"
GENERATIONS_FILENAME = "generations.csv"
ABLATION_TABLE_FILENAME = "ablation.csv"
ABLATION_SUMMARY_FILENAME = "ablation_summary.json"
GENERATIONS_COLUMNS = ("gen", "best_fit", "mean_fit", "archive_min_divfit", "elapsed_s")

SCHEMA_VERSION = 1
ABLATION_TOLERANCE = 0.02
