"""
Manager modules for high-level run orchestration.
"""

from .ablation_manager import AblationManager
from .optimization_manager import OptimizationEngine, OptimizationManager

__all__ = [
    'AblationManager',
    'OptimizationEngine',
    'OptimizationManager',
]
