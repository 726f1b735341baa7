"""
Genotype to phenotype mapping.

A derivation tree is read left to right: every algorithm terminal opens a new
workflow step and the hyper-parameter leaves that follow bind its values.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .constants import StepRole, TerminalKind
from .exceptions import EncodingError
from .grammar.types import DerivationTree, Grammar
from .utils.formatters import format_workflow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepSpec:
    """One workflow step: algorithm, role and bound hyper-parameters."""
    algorithm: str
    role: StepRole
    hparams: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'algorithm': self.algorithm, 'role': self.role.value, 'hparams': dict(self.hparams)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StepSpec':
        return cls(data['algorithm'], StepRole(data['role']), dict(data.get('hparams', {})))


@dataclass(frozen=True)
class WorkflowSpec:
    """Ordered steps; all but the last are preprocessing, the last is the classifier."""
    steps: Tuple[StepSpec, ...]

    @property
    def classifier(self) -> StepSpec:
        return self.steps[-1]

    @property
    def preprocessing(self) -> Tuple[StepSpec, ...]:
        return self.steps[:-1]

    def render(self) -> str:
        return format_workflow(self)

    def __str__(self):
        return self.render()

    def to_dict(self) -> Dict[str, Any]:
        return {'steps': [step.to_dict() for step in self.steps]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WorkflowSpec':
        return cls(tuple(StepSpec.from_dict(step) for step in data['steps']))


@dataclass
class HParamSlotRef:
    """Locates one bound hyper-parameter in both the phenotype and the genotype."""
    step_index: int
    algorithm: str
    hparam: str
    role: StepRole
    node: DerivationTree


def hparam_slots(tree: DerivationTree, grammar: Grammar) -> List[HParamSlotRef]:
    """Hyper-parameter leaves of a genotype, in workflow order."""
    slots: List[HParamSlotRef] = []
    step_index = -1
    role: Optional[StepRole] = None
    for leaf in tree.leaves():
        kind = grammar.kind_of(leaf.symbol)
        if kind in (TerminalKind.PREPROCESSING, TerminalKind.CLASSIFIER):
            step_index += 1
            role = StepRole(kind.value)
        elif kind == TerminalKind.HPARAM:
            slots.append(HParamSlotRef(step_index, leaf.owner, leaf.symbol, role, leaf))
    return slots


def to_phenotype(tree: DerivationTree, grammar: Grammar) -> WorkflowSpec:
    """
    Map a derivation tree to its workflow.

    Raises:
        EncodingError: If the tree does not yield a valid workflow (a bug upstream)
    """
    steps: List[Tuple[str, StepRole, Dict[str, Any]]] = []
    for leaf in tree.leaves():
        kind = grammar.kind_of(leaf.symbol)
        if kind in (TerminalKind.PREPROCESSING, TerminalKind.CLASSIFIER):
            steps.append((leaf.symbol, StepRole(kind.value), {}))
        elif kind == TerminalKind.HPARAM:
            if not steps or steps[-1][0] != leaf.owner:
                raise EncodingError(
                    f"Hyper-parameter {leaf.symbol} is not bound to the preceding algorithm",
                    error_code='ENCODING',
                )
            steps[-1][2][leaf.symbol] = leaf.value
        else:
            raise EncodingError(f"Unknown terminal {leaf.symbol}", error_code='ENCODING')

    if not steps:
        raise EncodingError("Derivation yields an empty workflow", error_code='ENCODING')
    roles = [role for _, role, _ in steps]
    if roles[-1] != StepRole.CLASSIFIER or StepRole.CLASSIFIER in roles[:-1]:
        raise EncodingError(
            f"Workflow must end with exactly one classifier, got {[name for name, _, _ in steps]}",
            error_code='ENCODING',
        )
    return WorkflowSpec(tuple(StepSpec(name, role, hparams) for name, role, hparams in steps))


def common_hparam_slots(
    tree_a: DerivationTree,
    tree_b: DerivationTree,
    grammar: Grammar,
) -> List[Tuple[HParamSlotRef, HParamSlotRef]]:
    """
    Pair the hyper-parameters both genotypes share.

    The k-th occurrence of an algorithm in ``tree_a`` pairs with its k-th
    occurrence in ``tree_b``; pairs follow the workflow order of ``tree_a``.
    """
    def by_occurrence(slots):
        grouped: Dict[Tuple[str, int], Dict[str, HParamSlotRef]] = {}
        occurrences: Dict[str, int] = {}
        step_keys: Dict[int, Tuple[str, int]] = {}
        for slot in slots:
            if slot.step_index not in step_keys:
                occurrence = occurrences.get(slot.algorithm, 0)
                occurrences[slot.algorithm] = occurrence + 1
                step_keys[slot.step_index] = (slot.algorithm, occurrence)
            grouped.setdefault(step_keys[slot.step_index], {})[slot.hparam] = slot
        return grouped

    slots_a = hparam_slots(tree_a, grammar)
    grouped_b = by_occurrence(hparam_slots(tree_b, grammar))
    pairs = []
    for key, slots in by_occurrence(slots_a).items():
        partner = grouped_b.get(key)
        if partner is None:
            continue
        for name, slot in slots.items():
            if name in partner:
                pairs.append((slot, partner[name]))
    return pairs


def common_hparams(a, b) -> List[Tuple[HParamSlotRef, HParamSlotRef]]:
    """Common hyper-parameter pairs of two individuals (see common_hparam_slots)."""
    return common_hparam_slots(a.genotype, b.genotype, a.grammar)
