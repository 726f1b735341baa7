"""
Custom exceptions for workflow optimisation.
"""


class AutoflowException(Exception):
    """Base exception for all autoflow errors."""

    exit_code = 2

    def __init__(self, message, error_code=None, details=None):
        self.message = message
        self.error_code = error_code
        self.details = details
        super().__init__(self.message)

    def to_dict(self):
        """Machine-readable form used by the command-line interface."""
        return {
            'type': type(self).__name__,
            'code': self.error_code,
            'message': self.message,
            'details': self.details,
        }


class ConfigurationError(AutoflowException):
    """Raised when there's a configuration issue."""
    exit_code = 1


class ValidationError(AutoflowException):
    """Raised when input validation fails."""
    exit_code = 1


class GrammarError(AutoflowException):
    """Base class for grammar problems."""
    exit_code = 1


class GrammarSyntaxError(GrammarError):
    """Raised when a grammar file cannot be tokenised."""

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(
            f"{message} (line {line}, column {column})",
            error_code='GRAMMAR_SYNTAX',
            details={'line': line, 'column': column},
        )


class GrammarValidationError(GrammarError):
    """Raised when a parsed grammar violates its invariants."""

    def __init__(self, issues):
        self.issues = list(issues)
        summary = "; ".join(issue.message for issue in self.issues)
        super().__init__(
            f"Grammar has {len(self.issues)} issue(s): {summary}",
            error_code='GRAMMAR_INVALID',
            details={'issues': [issue.to_dict() for issue in self.issues]},
        )


class BudgetInfeasibleError(GrammarError):
    """Raised when maxDer is too small to derive any complete workflow."""


class EncodingError(AutoflowException):
    """Raised when a genotype cannot be mapped to a workflow (internal bug)."""


class DatasetError(ValidationError):
    """Raised when a dataset is unusable."""


class DatasetFormatError(DatasetError):
    """Raised when a CSV cell cannot be parsed."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(
            message,
            error_code='DATASET_FORMAT',
            details={'row': row, 'column': column},
        )


class MetricError(ValidationError):
    """Raised when metric inputs are malformed."""


class StepFailure(AutoflowException):
    """Raised when a workflow step cannot be fitted or applied."""


class EvaluationTimeout(AutoflowException):
    """Raised at a cooperative checkpoint once evalBudget is exhausted."""


class ArchiveError(AutoflowException):
    """Raised on invalid archive queries."""


class EnsembleError(AutoflowException):
    """Raised when an ensemble cannot be built or used."""


class EnsembleFormatError(EnsembleError):
    """Raised when a persisted ensemble document is malformed."""
    exit_code = 1


class OptimizationError(AutoflowException):
    """Raised when a run ends without any workflow to return."""
