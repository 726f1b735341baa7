"""
Random derivation of workflow trees under a structural derivation budget.
"""

import math
from typing import Any, List, Optional, Tuple

import numpy as np

from ..constants import HParamKind, TerminalKind
from ..exceptions import BudgetInfeasibleError
from .types import DerivationTree, Grammar, HParamDomain, is_nonterminal


def sample_hparam_value(domain: HParamDomain, rng: np.random.Generator) -> Any:
    """
    Draw a value uniformly from a hyper-parameter domain.

    Log-scaled ranges are uniform in log10 space; values are returned as
    plain Python ``bool``/``int``/``float``/``str``.
    """
    if domain.kind == HParamKind.BOOLEAN:
        return bool(rng.integers(2))
    if domain.kind == HParamKind.CATEGORICAL:
        return domain.values[int(rng.integers(len(domain.values)))]
    if domain.kind == HParamKind.INTEGER:
        lower, upper = int(domain.lower), int(domain.upper)
        if not domain.log_scale:
            return int(rng.integers(lower, upper + 1))
        # uniform in log space over [lower, upper + 1) then floored
        exponent = rng.uniform(math.log10(lower), math.log10(upper + 1))
        return min(max(int(math.floor(10 ** exponent)), lower), upper)
    lower, upper = float(domain.lower), float(domain.upper)
    if domain.log_scale:
        value = 10 ** rng.uniform(math.log10(lower), math.log10(upper))
    else:
        value = rng.uniform(lower, upper)
    return float(min(max(value, lower), upper))


def expand_symbol(
    grammar: Grammar,
    symbol: str,
    budget: float,
    rng: np.random.Generator,
    owner: Optional[str] = None,
) -> Tuple[DerivationTree, int]:
    """
    Derive ``symbol`` completely using at most ``budget`` structural derivations.

    At each expansion the alternative is drawn uniformly among those whose
    minimal completion still fits the remaining budget.

    Returns:
        (subtree, structural derivations used)

    Raises:
        BudgetInfeasibleError: If no alternative fits the budget
    """
    if not is_nonterminal(symbol):
        if grammar.kind_of(symbol) == TerminalKind.HPARAM:
            value = sample_hparam_value(grammar.domain(owner, symbol), rng)
            return DerivationTree(symbol, owner=owner, value=value), 0
        return DerivationTree(symbol), 0

    rule = grammar.rule(symbol)
    own = 1 if rule.structural else 0
    feasible = [
        index for index, alternative in enumerate(rule.alternatives)
        if own + grammar.alternative_cost(alternative) <= budget
    ]
    if not feasible:
        raise BudgetInfeasibleError(
            f"Cannot derive {symbol} within {budget} structural derivations "
            f"(needs {grammar.min_costs[symbol]})",
            error_code='BUDGET_INFEASIBLE',
            details={'symbol': symbol, 'budget': budget},
        )
    index = feasible[int(rng.integers(len(feasible)))]
    alternative = rule.alternatives[index]

    # reserve the minimal cost of the symbols still to the right
    tail_costs: List[float] = [0.0] * (len(alternative) + 1)
    for position in range(len(alternative) - 1, -1, -1):
        child = alternative[position]
        cost = grammar.min_costs[child] if is_nonterminal(child) else 0
        tail_costs[position] = tail_costs[position + 1] + cost

    node = DerivationTree(symbol, alternative=index, structural=rule.structural)
    remaining = budget - own
    used = own
    for position, child in enumerate(alternative):
        if not is_nonterminal(child) and grammar.kind_of(child) in (TerminalKind.PREPROCESSING, TerminalKind.CLASSIFIER):
            owner = child
        subtree, spent = expand_symbol(grammar, child, remaining - tail_costs[position + 1], rng, owner)
        node.children.append(subtree)
        remaining -= spent
        used += spent
    return node, used


def random_derivation(grammar: Grammar, max_der: int, rng: np.random.Generator) -> DerivationTree:
    """
    Generate a random complete derivation tree rooted at the grammar's root.

    Args:
        grammar: Validated grammar
        max_der: Maximum number of structural derivations
        rng: Seeded random stream

    Returns:
        DerivationTree with structural_derivation_count <= max_der

    Raises:
        BudgetInfeasibleError: If max_der is below the grammar's minimum
    """
    if max_der < grammar.min_derivations:
        raise BudgetInfeasibleError(
            f"maxDer={max_der} is below the minimum of {grammar.min_derivations} "
            f"structural derivations for a complete workflow",
            error_code='BUDGET_INFEASIBLE',
            details={'max_der': max_der, 'minimum': grammar.min_derivations},
        )
    tree, _ = expand_symbol(grammar, grammar.root, max_der, rng)
    return tree


def structural_derivation_count(tree: DerivationTree) -> int:
    """Count expansions of structural rules; hyper-parameter rules are excluded."""
    return sum(1 for _, node in tree.iter_nodes() if not node.is_leaf and node.structural)


def tree_violations(tree: DerivationTree, grammar: Grammar, max_der: Optional[int] = None) -> List[str]:
    """
    List every DerivationTree invariant the tree breaks (empty when valid).
    """
    problems: List[str] = []

    def visit(node: DerivationTree, owner: Optional[str]):
        if node.is_leaf:
            if is_nonterminal(node.symbol):
                problems.append(f"leaf {node.symbol} is a non-terminal")
            elif node.symbol not in grammar.terminals:
                problems.append(f"unknown terminal {node.symbol}")
            elif grammar.kind_of(node.symbol) == TerminalKind.HPARAM:
                key = (node.owner, node.symbol)
                if node.owner != owner or key not in grammar.hparam_domains:
                    problems.append(f"hyper-parameter {node.symbol} has wrong owner {node.owner}")
                elif not grammar.hparam_domains[key].contains(node.value):
                    problems.append(f"{node.owner}.{node.symbol}={node.value!r} outside its domain")
            return owner
        rule = grammar.rule_map.get(node.symbol)
        if rule is None:
            problems.append(f"no rule for {node.symbol}")
            return owner
        if node.structural != rule.structural:
            problems.append(f"{node.symbol} has the wrong structural flag")
        if not 0 <= node.alternative < len(rule.alternatives):
            problems.append(f"{node.symbol} has invalid alternative {node.alternative}")
            return owner
        expected = rule.alternatives[node.alternative]
        if tuple(child.symbol for child in node.children) != expected:
            problems.append(f"children of {node.symbol} do not match alternative {node.alternative}")
            return owner
        for child in node.children:
            if child.is_leaf and grammar.kind_of(child.symbol) in (TerminalKind.PREPROCESSING, TerminalKind.CLASSIFIER):
                owner = child.symbol
            visit(child, owner)
        return owner

    if tree.symbol != grammar.root:
        problems.append(f"root is {tree.symbol}, expected {grammar.root}")
    visit(tree, None)
    if max_der is not None:
        count = structural_derivation_count(tree)
        if count > max_der:
            problems.append(f"{count} structural derivations exceed maxDer={max_der}")
    return problems
