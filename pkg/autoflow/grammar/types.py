"""
Domain types for workflow grammars and derivation trees.
"""

import copy
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Tuple

from ..constants import HParamKind, TerminalKind

INFINITE_COST = math.inf

Path = Tuple[int, ...]


def is_nonterminal(symbol: str) -> bool:
    """Angle-bracketed symbols are non-terminals, bare ones terminals."""
    return len(symbol) > 2 and symbol.startswith('<') and symbol.endswith('>')


@dataclass(frozen=True)
class GrammarIssue:
    """One problem found while validating a grammar."""
    code: str
    message: str
    symbol: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'code': self.code, 'message': self.message, 'symbol': self.symbol}


@dataclass(frozen=True)
class HParamDomain:
    """
    Domain of one hyper-parameter slot.

    Integer and real ranges use ``lower``/``upper`` (inclusive) and may be
    sampled in log space; categorical domains list their ``values``.
    """
    kind: HParamKind
    lower: Optional[float] = None
    upper: Optional[float] = None
    values: Tuple[Any, ...] = ()
    log_scale: bool = False

    def issues(self, name: str) -> List[GrammarIssue]:
        problems = []
        if self.kind in (HParamKind.INTEGER, HParamKind.REAL):
            if self.lower is None or self.upper is None:
                problems.append(GrammarIssue('INVALID_DOMAIN', f"{name}: range needs two bounds", name))
            elif self.lower > self.upper:
                problems.append(GrammarIssue(
                    'INVALID_DOMAIN', f"{name}: lower bound {self.lower} exceeds upper bound {self.upper}", name
                ))
            elif self.log_scale and self.lower <= 0:
                problems.append(GrammarIssue('INVALID_DOMAIN', f"{name}: log scale needs a positive lower bound", name))
        if self.kind == HParamKind.CATEGORICAL:
            if not self.values:
                problems.append(GrammarIssue('INVALID_DOMAIN', f"{name}: categorical domain is empty", name))
            elif len(set(self.values)) != len(self.values):
                problems.append(GrammarIssue('INVALID_DOMAIN', f"{name}: categorical domain has duplicates", name))
        if self.log_scale and self.kind not in (HParamKind.INTEGER, HParamKind.REAL):
            problems.append(GrammarIssue('INVALID_DOMAIN', f"{name}: log scale only applies to ranges", name))
        return problems

    def contains(self, value: Any) -> bool:
        if self.kind == HParamKind.BOOLEAN:
            return isinstance(value, bool)
        if self.kind == HParamKind.CATEGORICAL:
            return any(value == v and type(value) is type(v) for v in self.values)
        if isinstance(value, bool):
            return False
        if self.kind == HParamKind.INTEGER:
            return isinstance(value, int) and self.lower <= value <= self.upper
        return isinstance(value, (int, float)) and self.lower <= value <= self.upper

    def describe(self) -> str:
        if self.kind == HParamKind.BOOLEAN:
            return "bool"
        if self.kind == HParamKind.CATEGORICAL:
            return "cat " + ",".join(str(v) for v in self.values)
        text = f"{self.kind.value} {self.lower:g} {self.upper:g}"
        return text + " log" if self.log_scale else text


@dataclass(frozen=True)
class ProductionRule:
    """All alternatives of one non-terminal; ``structural`` rules count toward maxDer."""
    lhs: str
    alternatives: Tuple[Tuple[str, ...], ...]
    structural: bool = False


@dataclass(frozen=True)
class Grammar:
    """
    Context-free workflow grammar {S, Σ_N, Σ_T, P} with hyper-parameter domains.

    Immutable after construction; derived tables are computed lazily and
    cached, so a grammar can be shared between threads.
    """
    root: str
    rules: Tuple[ProductionRule, ...]
    hparam_domains: Dict[Tuple[str, str], HParamDomain] = field(default_factory=dict)
    structural_symbols: frozenset = frozenset()
    classifier_symbols: frozenset = frozenset()
    source: str = ''

    @cached_property
    def rule_map(self) -> Dict[str, ProductionRule]:
        return {rule.lhs: rule for rule in self.rules}

    @cached_property
    def nonterminals(self) -> frozenset:
        symbols = {self.root} | set(self.rule_map)
        for rule in self.rules:
            for alternative in rule.alternatives:
                symbols.update(s for s in alternative if is_nonterminal(s))
        return frozenset(symbols)

    @cached_property
    def terminals(self) -> frozenset:
        return frozenset(
            s for rule in self.rules for alternative in rule.alternatives
            for s in alternative if not is_nonterminal(s)
        )

    @cached_property
    def _terminal_tags(self) -> Dict[str, List[TerminalKind]]:
        tags: Dict[str, List[TerminalKind]] = {}
        for rule in self.rules:
            if not rule.structural:
                kind = TerminalKind.HPARAM
            elif rule.lhs in self.classifier_symbols:
                kind = TerminalKind.CLASSIFIER
            else:
                kind = TerminalKind.PREPROCESSING
            for alternative in rule.alternatives:
                for symbol in alternative:
                    if not is_nonterminal(symbol) and kind not in tags.setdefault(symbol, []):
                        tags[symbol].append(kind)
        return tags

    @cached_property
    def terminal_kinds(self) -> Dict[str, TerminalKind]:
        """
        Tag terminals: those in structural rules are algorithms (classifiers when
        the rule's lhs is a classifier symbol), the rest are hyper-parameter slots.
        Conflicting terminals keep their first tag; validation reports them.
        """
        return {symbol: kinds[0] for symbol, kinds in self._terminal_tags.items()}

    @cached_property
    def terminal_conflicts(self) -> Dict[str, List[TerminalKind]]:
        return {symbol: kinds for symbol, kinds in self._terminal_tags.items() if len(kinds) > 1}

    @cached_property
    def min_costs(self) -> Dict[str, float]:
        """Minimal structural derivations needed to complete each non-terminal."""
        costs = {symbol: INFINITE_COST for symbol in self.nonterminals}
        changed = True
        while changed:
            changed = False
            for rule in self.rules:
                own = 1 if rule.structural else 0
                best = min(self._alternative_cost(alt, costs) for alt in rule.alternatives)
                if own + best < costs[rule.lhs]:
                    costs[rule.lhs] = own + best
                    changed = True
        return costs

    def _alternative_cost(self, alternative, costs) -> float:
        return sum(costs.get(s, INFINITE_COST) for s in alternative if is_nonterminal(s))

    def alternative_cost(self, alternative: Tuple[str, ...]) -> float:
        return self._alternative_cost(alternative, self.min_costs)

    @property
    def min_derivations(self) -> float:
        """Smallest maxDer that admits a complete workflow."""
        return self.min_costs.get(self.root, INFINITE_COST)

    @cached_property
    def slot_owners(self) -> Dict[str, set]:
        """Algorithms owning each hyper-parameter non-terminal."""
        owners: Dict[str, set] = {}
        pending = []
        for rule in self.rules:
            if not rule.structural:
                continue
            for alternative in rule.alternatives:
                owner = None
                for symbol in alternative:
                    if symbol in self.terminal_kinds and self.terminal_kinds[symbol] != TerminalKind.HPARAM:
                        owner = symbol
                    elif is_nonterminal(symbol) and owner is not None:
                        target = self.rule_map.get(symbol)
                        if target is not None and not target.structural:
                            owners.setdefault(symbol, set()).add(owner)
                            pending.append(symbol)
        # hyper-parameter rules may nest further non-structural rules
        while pending:
            symbol = pending.pop()
            rule = self.rule_map.get(symbol)
            if rule is None:
                continue
            for alternative in rule.alternatives:
                for child in alternative:
                    if is_nonterminal(child) and child in self.rule_map and not self.rule_map[child].structural:
                        before = set(owners.get(child, set()))
                        owners.setdefault(child, set()).update(owners[symbol])
                        if owners[child] != before:
                            pending.append(child)
        return owners

    def rule(self, symbol: str) -> ProductionRule:
        return self.rule_map[symbol]

    def is_terminal(self, symbol: str) -> bool:
        return not is_nonterminal(symbol)

    def kind_of(self, terminal: str) -> Optional[TerminalKind]:
        return self.terminal_kinds.get(terminal)

    def domain(self, algorithm: str, hparam: str) -> HParamDomain:
        return self.hparam_domains[(algorithm, hparam)]

    def algorithms(self, kind: Optional[TerminalKind] = None) -> List[str]:
        return sorted(
            t for t, k in self.terminal_kinds.items()
            if k != TerminalKind.HPARAM and (kind is None or k == kind)
        )


@dataclass
class DerivationTree:
    """
    A node of a derivation tree; the root node is the individual's genotype.

    Internal nodes carry the chosen alternative index and whether their rule is
    structural. Hyper-parameter leaves carry the owning algorithm and the bound
    value; algorithm leaves carry neither.
    """
    symbol: str
    alternative: Optional[int] = None
    children: List['DerivationTree'] = field(default_factory=list)
    structural: bool = False
    owner: Optional[str] = None
    value: Any = None

    @property
    def is_leaf(self) -> bool:
        return self.alternative is None

    @property
    def is_hparam(self) -> bool:
        return self.is_leaf and self.owner is not None

    def iter_nodes(self, path: Path = ()) -> Iterator[Tuple[Path, 'DerivationTree']]:
        """Pre-order traversal yielding (path, node)."""
        yield path, self
        for index, child in enumerate(self.children):
            yield from child.iter_nodes(path + (index,))

    def leaves(self) -> Iterator['DerivationTree']:
        for _, node in self.iter_nodes():
            if node.is_leaf:
                yield node

    def find(self, symbol: str) -> List[Path]:
        return [path for path, node in self.iter_nodes() if node.symbol == symbol and not node.is_leaf]

    def internal_symbols(self) -> set:
        return {node.symbol for _, node in self.iter_nodes() if not node.is_leaf}

    def subtree(self, path: Path) -> 'DerivationTree':
        node = self
        for index in path:
            node = node.children[index]
        return node

    def replace(self, path: Path, new: 'DerivationTree') -> 'DerivationTree':
        """Replace the subtree at ``path`` in place; returns the (possibly new) root."""
        if not path:
            return new
        parent = self.subtree(path[:-1])
        parent.children[path[-1]] = new
        return self

    def copy(self) -> 'DerivationTree':
        return copy.deepcopy(self)

    def to_dict(self) -> Dict[str, Any]:
        if self.is_leaf:
            data: Dict[str, Any] = {'symbol': self.symbol}
            if self.owner is not None:
                data['owner'] = self.owner
                data['value'] = self.value
            return data
        return {
            'symbol': self.symbol,
            'alternative': self.alternative,
            'structural': self.structural,
            'children': [child.to_dict() for child in self.children],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DerivationTree':
        return cls(
            symbol=data['symbol'],
            alternative=data.get('alternative'),
            children=[cls.from_dict(child) for child in data.get('children', [])],
            structural=data.get('structural', False),
            owner=data.get('owner'),
            value=data.get('value'),
        )

    def canonical(self) -> str:
        """Stable serialization; identical trees give identical strings."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

    def shape(self) -> str:
        """Serialization with hyper-parameter values masked."""
        def strip(data):
            data = dict(data)
            data.pop('value', None)
            if 'children' in data:
                data['children'] = [strip(child) for child in data['children']]
            return data
        return json.dumps(strip(self.to_dict()), sort_keys=True, separators=(',', ':'))
