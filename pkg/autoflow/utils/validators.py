"""
Validation utilities for configuration values.
"""

from typing import Any, List, Optional

from ..constants import RunMode


def validate_probability(name: str, value: Any, problems: List[str]) -> None:
    """Append a problem unless ``value`` is a real in [0, 1]."""
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
        problems.append(f"{name} must be in [0, 1]. Got: {value}")


def validate_positive_int(name: str, value: Any, problems: List[str], minimum: int = 1) -> None:
    """Append a problem unless ``value`` is an integer >= ``minimum``."""
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        problems.append(f"{name} must be an integer >= {minimum}. Got: {value}")


def validate_non_negative_int(name: str, value: Any, problems: List[str]) -> None:
    validate_positive_int(name, value, problems, minimum=0)


def validate_seconds(name: str, value: Any, problems: List[str], allow_none: bool = False) -> None:
    """Append a problem unless ``value`` is a non-negative number of seconds."""
    if value is None and allow_none:
        return
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
        problems.append(f"{name} must be a non-negative number of seconds. Got: {value}")


def validate_mode(value: Any, problems: List[str]) -> Optional[RunMode]:
    """
    Validate a run mode name.

    Returns:
        RunMode or None when invalid
    """
    try:
        return RunMode(value)
    except ValueError:
        valid = [mode.value for mode in RunMode]
        problems.append(f"Invalid mode: {value}. Supported modes: {', '.join(valid)}")
        return None


def validate_fraction(name: str, value: Any, problems: List[str]) -> None:
    """Append a problem unless ``value`` lies in (0, 0.5]."""
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 < value <= 0.5:
        problems.append(f"{name} must be in (0, 0.5]. Got: {value}")
