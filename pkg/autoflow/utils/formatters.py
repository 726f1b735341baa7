"""
Text formatting utilities for workflows and reports.
"""

from typing import Any, Optional


def format_value(value: Any) -> str:
    """
    Format a hyper-parameter value for display.

    Args:
        value: Bound value

    Returns:
        Short string (floats in general format with 6 significant digits)
    """
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_step(step) -> str:
    """Format one step as ``algorithm(h=v, ...)``."""
    params = ", ".join(f"{name}={format_value(value)}" for name, value in step.hparams.items())
    return f"{step.algorithm}({params})"


def format_workflow(workflow) -> str:
    """
    Render a workflow as ``alg1(h=v, ...) -> alg2(...) -> classifier(...)``.
    """
    return " -> ".join(format_step(step) for step in workflow.steps)


def format_fitness(fitness: Optional[float]) -> str:
    """Format a fitness value, or a dash when unevaluated."""
    if fitness is None:
        return "-"
    return f"{fitness:.4f}"


def format_duration(seconds: float) -> str:
    """
    Format seconds as a compact duration.

    Returns:
        Formatted string (e.g., "1h 02m 03s", "4.2s")
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, secs = divmod(int(round(seconds)), 60)
    hours, minutes = divmod(minutes, 60)
    if hours:
        return f"{hours}h {minutes:02d}m {secs:02d}s"
    return f"{minutes}m {secs:02d}s"
