"""
Grammar file parsing and validation.

File format (UTF-8, line oriented)::

    # comment
    %structural <workflow> <prepBranch> <preprocess> <classifier>
    %classifiers <classifier>
    <workflow> ::= <prepBranch> <classifier> | <classifier>
    <preprocess> ::= pca <pca_hp>
                   | minMaxScaler
    %domains
    pca.whiten bool
    pca.nComponents int 1 50

The root is the left-hand side of the first production unless ``%root``
names another one.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..constants import (
    DEFAULT_CLASSIFIER_SYMBOL, GRAMMAR_CLASSIFIERS_DIRECTIVE, GRAMMAR_DOMAINS_DIRECTIVE,
    GRAMMAR_ROOT_DIRECTIVE, GRAMMAR_STRUCTURAL_DIRECTIVE, HParamKind, TerminalKind,
)
from ..exceptions import GrammarError, GrammarSyntaxError, GrammarValidationError
from .types import Grammar, GrammarIssue, HParamDomain, ProductionRule, is_nonterminal

logger = logging.getLogger(__name__)

_SYMBOL = re.compile(r'^(<[A-Za-z_][\w\-]*>|[A-Za-z_][\w\-]*)$')
_INTEGER = re.compile(r'^[+-]?\d+$')


def _strip_comment(line: str) -> str:
    for index, char in enumerate(line):
        if char == '#' and (index == 0 or line[index - 1].isspace()):
            return line[:index]
    return line


def _symbols(text: str, line_no: int, offset: int) -> Tuple[str, ...]:
    symbols = []
    for match in re.finditer(r'\S+', text):
        token = match.group()
        if not _SYMBOL.match(token):
            raise GrammarSyntaxError(f"Invalid symbol '{token}'", line_no, offset + match.start() + 1)
        symbols.append(token)
    return tuple(symbols)


def _alternatives(text: str, line_no: int, offset: int) -> List[Tuple[str, ...]]:
    alternatives = []
    start = 0
    for piece in text.split('|'):
        symbols = _symbols(piece, line_no, offset + start)
        if not symbols:
            raise GrammarSyntaxError("Empty alternative", line_no, offset + start + 1)
        alternatives.append(symbols)
        start += len(piece) + 1
    return alternatives


def _number(token: str, line_no: int, column: int) -> float:
    try:
        return int(token) if _INTEGER.match(token) else float(token)
    except ValueError:
        raise GrammarSyntaxError(f"Expected a number, got '{token}'", line_no, column)


def _categorical_value(token: str):
    if _INTEGER.match(token):
        return int(token)
    try:
        return float(token)
    except ValueError:
        return token


def _parse_domain(line: str, line_no: int) -> Tuple[Tuple[str, str], HParamDomain]:
    tokens = [(m.group(), m.start() + 1) for m in re.finditer(r'\S+', line)]
    if len(tokens) < 2:
        raise GrammarSyntaxError("Domain line needs 'algorithm.hparam kind spec'", line_no, 1)
    slot, slot_col = tokens[0]
    if slot.count('.') != 1 or not all(_SYMBOL.match(part) for part in slot.split('.')):
        raise GrammarSyntaxError(f"Invalid slot name '{slot}'", line_no, slot_col)
    algorithm, hparam = slot.split('.')
    kind_token, kind_col = tokens[1]
    rest = tokens[2:]

    if kind_token == HParamKind.BOOLEAN.value:
        if rest:
            raise GrammarSyntaxError("bool domains take no spec", line_no, rest[0][1])
        return (algorithm, hparam), HParamDomain(HParamKind.BOOLEAN)

    if kind_token == HParamKind.CATEGORICAL.value:
        if len(rest) != 1:
            column = rest[1][1] if len(rest) > 1 else kind_col
            raise GrammarSyntaxError("cat domains take one comma-separated list", line_no, column)
        values = tuple(_categorical_value(v) for v in rest[0][0].split(',') if v)
        return (algorithm, hparam), HParamDomain(HParamKind.CATEGORICAL, values=values)

    if kind_token in (HParamKind.INTEGER.value, HParamKind.REAL.value):
        if len(rest) not in (2, 3):
            raise GrammarSyntaxError(f"{kind_token} domains take 'lo hi [log]'", line_no, kind_col)
        log_scale = False
        if len(rest) == 3:
            if rest[2][0] != 'log':
                raise GrammarSyntaxError(f"Unexpected '{rest[2][0]}'", line_no, rest[2][1])
            log_scale = True
        lower = _number(rest[0][0], line_no, rest[0][1])
        upper = _number(rest[1][0], line_no, rest[1][1])
        kind = HParamKind(kind_token)
        if kind == HParamKind.INTEGER:
            if not (float(lower).is_integer() and float(upper).is_integer()):
                raise GrammarSyntaxError("int bounds must be integers", line_no, rest[0][1])
            lower, upper = int(lower), int(upper)
        else:
            lower, upper = float(lower), float(upper)
        return (algorithm, hparam), HParamDomain(kind, lower=lower, upper=upper, log_scale=log_scale)

    raise GrammarSyntaxError(f"Unknown domain kind '{kind_token}'", line_no, kind_col)


def _directive_symbols(line: str, directive: str, line_no: int) -> List[str]:
    offset = len(directive)
    symbols = list(_symbols(line[offset:], line_no, offset))
    for symbol in symbols:
        if not is_nonterminal(symbol):
            raise GrammarSyntaxError(f"{directive} expects non-terminals, got '{symbol}'", line_no, line.index(symbol) + 1)
    return symbols


def parse_grammar(text: str, validate: bool = True) -> Grammar:
    """
    Parse a grammar file into a Grammar.

    Args:
        text: Grammar file contents
        validate: Raise GrammarValidationError when the grammar has issues

    Returns:
        Grammar with rule order preserved

    Raises:
        GrammarSyntaxError: On malformed lines (line/column reported)
        GrammarValidationError: On invariant violations
    """
    order: List[str] = []
    alternatives: Dict[str, List[Tuple[str, ...]]] = {}
    domains: Dict[Tuple[str, str], HParamDomain] = {}
    parse_issues: List[GrammarIssue] = []
    structural: Optional[List[str]] = None
    classifiers: Optional[List[str]] = None
    root: Optional[str] = None
    current: Optional[str] = None
    in_domains = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())

        if stripped.startswith('%'):
            directive = stripped.split()[0]
            if directive == GRAMMAR_DOMAINS_DIRECTIVE:
                in_domains = True
            elif directive == GRAMMAR_STRUCTURAL_DIRECTIVE:
                structural = _directive_symbols(stripped, directive, line_no)
            elif directive == GRAMMAR_CLASSIFIERS_DIRECTIVE:
                classifiers = _directive_symbols(stripped, directive, line_no)
            elif directive == GRAMMAR_ROOT_DIRECTIVE:
                symbols = _directive_symbols(stripped, directive, line_no)
                if len(symbols) != 1:
                    raise GrammarSyntaxError("%root takes exactly one non-terminal", line_no, indent + 1)
                root = symbols[0]
            else:
                raise GrammarSyntaxError(f"Unknown directive '{directive}'", line_no, indent + 1)
            current = None
            continue

        if in_domains:
            key, domain = _parse_domain(line, line_no)
            if key in domains:
                parse_issues.append(GrammarIssue(
                    'DUPLICATE_DOMAIN', f"Duplicate domain entry for {key[0]}.{key[1]}", '.'.join(key)
                ))
                continue
            domains[key] = domain
            continue

        if stripped.startswith('|'):
            if current is None:
                raise GrammarSyntaxError("Continuation line without a production", line_no, indent + 1)
            alternatives[current].extend(_alternatives(stripped[1:], line_no, indent + 1))
            continue

        if '::=' not in line:
            raise GrammarSyntaxError("Expected '<nonterminal> ::= ...'", line_no, indent + 1)
        lhs_text, rhs_text = line.split('::=', 1)
        lhs = lhs_text.strip()
        if not is_nonterminal(lhs) or not _SYMBOL.match(lhs):
            raise GrammarSyntaxError(f"Invalid left-hand side '{lhs}'", line_no, indent + 1)
        if lhs not in alternatives:
            order.append(lhs)
            alternatives[lhs] = []
        alternatives[lhs].extend(_alternatives(rhs_text, line_no, len(lhs_text) + 3))
        current = lhs

    if not order:
        raise GrammarSyntaxError("Grammar has no productions", 1, 1)

    root = root or order[0]
    if structural is None:
        structural = [symbol for symbol in order if not symbol.endswith('_hp>')]
    if classifiers is None:
        classifiers = [DEFAULT_CLASSIFIER_SYMBOL] if DEFAULT_CLASSIFIER_SYMBOL in alternatives else [root]

    grammar = Grammar(
        root=root,
        rules=tuple(
            ProductionRule(lhs, tuple(alternatives[lhs]), structural=lhs in structural)
            for lhs in order
        ),
        hparam_domains=domains,
        structural_symbols=frozenset(structural),
        classifier_symbols=frozenset(classifiers),
        source=text,
    )

    if validate:
        issues = parse_issues + validate_grammar(grammar)
        if issues:
            logger.error(f"Grammar validation failed with {len(issues)} issue(s)")
            raise GrammarValidationError(issues)

    logger.debug(f"Parsed grammar: root {grammar.root}, {len(grammar.rules)} rules, {len(domains)} domains")
    return grammar


def load_grammar(path) -> Grammar:
    """Read and parse a grammar file."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise GrammarError(f"Grammar file {path} not found", error_code='GRAMMAR_NOT_FOUND')
    return parse_grammar(text)


def validate_grammar(grammar: Grammar) -> List[GrammarIssue]:
    """
    Check every Grammar invariant.

    Returns:
        List of issues; empty for a valid grammar
    """
    issues: List[GrammarIssue] = []
    rule_map = grammar.rule_map

    if grammar.root not in rule_map:
        issues.append(GrammarIssue('UNDEFINED_NONTERMINAL', f"Root {grammar.root} has no rule", grammar.root))

    for symbol in sorted(grammar.nonterminals - set(rule_map) - {grammar.root}):
        issues.append(GrammarIssue('UNDEFINED_NONTERMINAL', f"undefined non-terminal {symbol}", symbol))

    for symbol in sorted((grammar.structural_symbols | grammar.classifier_symbols) - set(rule_map)):
        issues.append(GrammarIssue('UNDEFINED_NONTERMINAL', f"Directive names undefined non-terminal {symbol}", symbol))

    reachable = {grammar.root}
    frontier = [grammar.root]
    while frontier:
        rule = rule_map.get(frontier.pop())
        if rule is None:
            continue
        for alternative in rule.alternatives:
            for symbol in alternative:
                if is_nonterminal(symbol) and symbol not in reachable:
                    reachable.add(symbol)
                    frontier.append(symbol)
    for symbol in sorted(set(rule_map) - reachable):
        issues.append(GrammarIssue(
            'UNREACHABLE_NONTERMINAL', f"non-terminal {symbol} is unreachable from the root", symbol
        ))

    for rule in grammar.rules:
        if not rule.alternatives or any(not alt for alt in rule.alternatives):
            issues.append(GrammarIssue('EMPTY_ALTERNATIVE', f"Rule {rule.lhs} has an empty alternative", rule.lhs))

    for symbol in sorted(rule_map):
        if grammar.min_costs[symbol] == float('inf'):
            issues.append(GrammarIssue('NON_PRODUCTIVE', f"non-productive non-terminal {symbol}", symbol))

    for symbol, kinds in sorted(grammar.terminal_conflicts.items()):
        names = ", ".join(kind.value for kind in kinds)
        issues.append(GrammarIssue('TERMINAL_CONFLICT', f"Terminal {symbol} is tagged {names}", symbol))

    for symbol, owners in sorted(grammar.slot_owners.items()):
        if len(owners) > 1:
            issues.append(GrammarIssue(
                'OWNER_CONFLICT', f"{symbol} is shared by algorithms {', '.join(sorted(owners))}", symbol
            ))

    # every hyper-parameter terminal must be reachable under an owning algorithm with a domain
    owned_slots = set()
    for rule in grammar.rules:
        if rule.structural:
            continue
        owners = grammar.slot_owners.get(rule.lhs, set())
        for alternative in rule.alternatives:
            for symbol in alternative:
                if grammar.kind_of(symbol) != TerminalKind.HPARAM:
                    continue
                if not owners:
                    issues.append(GrammarIssue(
                        'ORPHAN_HPARAM', f"Hyper-parameter {symbol} in {rule.lhs} has no owning algorithm", symbol
                    ))
                for owner in sorted(owners):
                    owned_slots.add((owner, symbol))
    for owner, symbol in sorted(owned_slots):
        if (owner, symbol) not in grammar.hparam_domains:
            issues.append(GrammarIssue(
                'MISSING_DOMAIN', f"hyper-parameter slot {owner}.{symbol} has no domain", f"{owner}.{symbol}"
            ))

    for (algorithm, hparam), domain in sorted(grammar.hparam_domains.items()):
        issues.extend(domain.issues(f"{algorithm}.{hparam}"))

    return issues
