"""
Workflow grammars: parsing, validation and random derivation.
"""

from .parser import load_grammar, parse_grammar, validate_grammar
from .sampler import (
    expand_symbol,
    random_derivation,
    sample_hparam_value,
    structural_derivation_count,
    tree_violations,
)
from .types import DerivationTree, Grammar, GrammarIssue, HParamDomain, ProductionRule

__all__ = [
    'DerivationTree',
    'Grammar',
    'GrammarIssue',
    'HParamDomain',
    'ProductionRule',
    'expand_symbol',
    'load_grammar',
    'parse_grammar',
    'random_derivation',
    'sample_hparam_value',
    'structural_derivation_count',
    'tree_violations',
    'validate_grammar',
]
