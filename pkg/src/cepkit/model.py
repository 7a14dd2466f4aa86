"""In-memory representation of CEP rules.

A rule couples declared event schemas with four logical groups: the event
bindings (targets, each optionally windowed), the select list (bring), a
boolean condition, and a grouping clause. Rules may alternatively carry an
event pattern tree. Values here are immutable; structural problems are
stored as-is and surfaced by :mod:`cepkit.validation`, never repaired
silently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .errors import (
    AliasCollisionError,
    InvalidIdentifierError,
    UnknownAliasError,
    UnknownAttributeError,
)

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def is_identifier(name: object) -> bool:
    return isinstance(name, str) and bool(_IDENT_RE.match(name))


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


class AttributeKind(str, Enum):
    INTEGER = "integer"
    FLOAT = "float"
    STRING = "string"
    BOOLEAN = "boolean"
    TIMESTAMP = "timestamp"  # milliseconds since epoch, integer-valued


class WindowKind(str, Enum):
    TIMER = "timer"
    COUNTER = "counter"
    KEEP_ALL = "keep_all"


class GuardKind(str, Enum):
    WITH_IN = "with_in"
    WITH_IN_MAX = "with_in_max"


class RepetitionKind(str, Enum):
    EVERY = "every"
    EVERY_DISTINCT = "every_distinct"
    RANGE = "range"
    WHILE_COND = "while"
    UNTIL = "until"


class CompareOp(str, Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="


class LogicalOp(str, Enum):
    AND = "and"
    OR = "or"
    NOT = "not"


class ArithOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


class AggFn(str, Enum):
    AVG = "avg"
    SUM = "sum"
    MAX = "max"
    MIN = "min"
    COUNT = "count"

NUMERIC_AGGS = frozenset({AggFn.AVG, AggFn.SUM, AggFn.MAX, AggFn.MIN})


class ScalarFnName(str, Enum):
    """Two-argument scalar functions, distinct from the aggregations."""

    MAX2 = "max2"
    MIN2 = "min2"


def _tuplify(self, *names: str) -> None:
    # Frozen dataclasses: normalize sequence fields to tuples on construction.
    for name in names:
        value = getattr(self, name)
        if value is not None and not isinstance(value, tuple):
            object.__setattr__(self, name, tuple(value))


# ---------------------------------------------------------------------------
# Expressions and operands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttrRef:
    """Reference to ``alias.attr``; ``alias=None`` means an unqualified name."""

    alias: str | None
    attr: str


@dataclass(frozen=True)
class Literal:
    """A free constant; its kind follows the Python type of ``value``."""

    value: int | float | str | bool

    @property
    def kind(self) -> AttributeKind:
        if isinstance(self.value, bool):
            return AttributeKind.BOOLEAN
        if isinstance(self.value, int):
            return AttributeKind.INTEGER
        if isinstance(self.value, float):
            return AttributeKind.FLOAT
        return AttributeKind.STRING


@dataclass(frozen=True)
class AggCall:
    """Aggregation over a window/join column; ``target=None`` is ``count(*)``."""

    fn: AggFn
    target: AttrRef | None = None


@dataclass(frozen=True)
class ScalarFn:
    fn: ScalarFnName
    args: tuple["Operand", "Operand"]

    def __post_init__(self):
        _tuplify(self, "args")


@dataclass(frozen=True)
class ArithExpr:
    """Wraps an arithmetic expression where an operand is expected."""

    expr: "Arith"


Operand = Union[AttrRef, Literal, AggCall, ScalarFn, ArithExpr]


@dataclass(frozen=True)
class Compare:
    op: CompareOp
    lhs: Operand
    rhs: Operand


@dataclass(frozen=True)
class Logical:
    op: LogicalOp
    children: tuple["Expression", ...]

    def __post_init__(self):
        _tuplify(self, "children")


@dataclass(frozen=True)
class Arith:
    op: ArithOp
    lhs: Operand
    rhs: Operand


Expression = Union[Compare, Logical, Arith]


# ---------------------------------------------------------------------------
# Events, targets, windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: AttributeKind


@dataclass(frozen=True)
class EventType:
    name: str
    attributes: tuple[Attribute, ...] = ()

    def __post_init__(self):
        _tuplify(self, "attributes")

    def attribute(self, name: str) -> Attribute | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None


@dataclass(frozen=True)
class Window:
    kind: WindowKind
    seconds: int | float | None = None  # timer only, > 0
    count: int | None = None  # counter only, >= 1

    @staticmethod
    def timer(seconds: int | float) -> "Window":
        return Window(WindowKind.TIMER, seconds=seconds)

    @staticmethod
    def counter(count: int) -> "Window":
        return Window(WindowKind.COUNTER, count=count)

    @staticmethod
    def keep_all() -> "Window":
        return Window(WindowKind.KEEP_ALL)


@dataclass(frozen=True)
class TargetBinding:
    """Binds one declared event into the rule, optionally windowed.

    ``group_win`` partitions the window into independent per-key instances,
    keyed by the named attributes of the bound event.
    """

    event_name: str
    alias: str | None = None
    window: Window | None = None
    group_win: tuple[str, ...] | None = None

    def __post_init__(self):
        _tuplify(self, "group_win")


# ---------------------------------------------------------------------------
# Pattern tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PatternGuard:
    kind: GuardKind
    seconds: int | float
    max_instances: int | None = None  # with_in_max only


@dataclass(frozen=True)
class RepetitionSpec:
    kind: RepetitionKind
    distinct_keys: tuple[AttrRef, ...] = ()  # every_distinct
    low: int | None = None  # range
    high: int | None = None  # range
    condition: Expression | None = None  # while
    until_child: "PatternNode | None" = None  # until

    def __post_init__(self):
        _tuplify(self, "distinct_keys")

EVERY = RepetitionSpec(RepetitionKind.EVERY)


@dataclass(frozen=True)
class PatternNode:
    """Base of the pattern tree; every node may carry a guard and a repetition."""

    guard: PatternGuard | None = field(default=None, kw_only=True)
    repetition: RepetitionSpec | None = field(default=None, kw_only=True)


@dataclass(frozen=True)
class EventRef(PatternNode):
    """Matches one event of the target bound at ``alias``.

    The filter sees the candidate's own attributes unqualified; qualified
    references address previously matched tags. ``tag`` names the capture
    and defaults to the alias.
    """

    alias: str = ""
    filter: Expression | None = None
    tag: str | None = None

    @property
    def capture(self) -> str:
        return self.tag if self.tag is not None else self.alias


@dataclass(frozen=True)
class And(PatternNode):
    children: tuple[PatternNode, ...] = ()

    def __post_init__(self):
        _tuplify(self, "children")


@dataclass(frozen=True)
class Or(PatternNode):
    children: tuple[PatternNode, ...] = ()

    def __post_init__(self):
        _tuplify(self, "children")


@dataclass(frozen=True)
class FollowedBy(PatternNode):
    """Children match in strict temporal order (ties broken by arrival)."""

    children: tuple[PatternNode, ...] = ()

    def __post_init__(self):
        _tuplify(self, "children")


@dataclass(frozen=True)
class Not(PatternNode):
    child: PatternNode = field(default_factory=lambda: EventRef(alias=""))


def pattern_refs(node: PatternNode) -> list[EventRef]:
    """All event references in preorder, including until-children."""
    out: list[EventRef] = []

    def walk(n: PatternNode) -> None:
        if isinstance(n, EventRef):
            out.append(n)
        elif isinstance(n, Not):
            walk(n.child)
        elif isinstance(n, (And, Or, FollowedBy)):
            for child in n.children:
                walk(child)
        if n.repetition is not None and n.repetition.until_child is not None:
            walk(n.repetition.until_child)

    walk(node)
    return out


# ---------------------------------------------------------------------------
# Select list, grouping, output
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Star:
    """The ``select *`` wildcard."""


STAR = Star()


@dataclass(frozen=True)
class SelectItem:
    expr: Operand | Star
    output_alias: str | None = None


@dataclass(frozen=True)
class GroupBySpec:
    keys: tuple[AttrRef, ...]

    def __post_init__(self):
        _tuplify(self, "keys")


@dataclass(frozen=True)
class OutputSpec:
    """Name of the derived event a triggered rule emits; the select list is
    its implicit schema."""

    name: str


# ---------------------------------------------------------------------------
# The rule itself
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleModel:
    name: str
    events: tuple[EventType, ...] = ()
    targets: tuple[TargetBinding, ...] = ()
    pattern: PatternNode | None = None
    bring: tuple[SelectItem, ...] = ()
    condition: Expression | None = None
    group_by: GroupBySpec | None = None
    output: OutputSpec | None = None

    def __post_init__(self):
        _tuplify(self, "events", "targets", "bring")

    def event_type(self, name: str) -> EventType | None:
        for event in self.events:
            if event.name == name:
                return event
        return None


def new_model(name: str) -> RuleModel:
    """Create an empty rule; the four logical groups start empty."""
    if not is_identifier(name):
        raise InvalidIdentifierError(f"invalid rule name: {name!r}")
    return RuleModel(name=name)


# ---------------------------------------------------------------------------
# Name resolution
# ---------------------------------------------------------------------------


def effective_alias(target: TargetBinding) -> str:
    """Explicit alias, or the lowercased event name when absent."""
    return target.alias if target.alias is not None else target.event_name.lower()


@dataclass(frozen=True)
class Binding:
    index: int
    target: TargetBinding
    event: EventType
    alias: str


class Scope:
    """Alias/attribute lookup over a model's targets.

    Targets naming undeclared events contribute no binding; the validator
    reports them separately.
    """

    def __init__(self, model: RuleModel):
        self.model = model
        self.bindings: dict[str, Binding] = {}
        self.ordered: list[Binding] = []
        for index, target in enumerate(model.targets):
            event = model.event_type(target.event_name)
            if event is None:
                continue
            binding = Binding(index, target, event, effective_alias(target))
            self.ordered.append(binding)
            # First binding wins on alias collision; V002 flags the clash.
            self.bindings.setdefault(binding.alias, binding)

    def resolve_qualified(self, alias: str, attr: str) -> tuple[Binding, Attribute]:
        binding = self.bindings.get(alias)
        if binding is None:
            raise UnknownAliasError(f"unknown alias: {alias!r}")
        attribute = binding.event.attribute(attr)
        if attribute is None:
            raise UnknownAttributeError(
                f"event {binding.event.name!r} has no attribute {attr!r}"
            )
        return binding, attribute

    def resolve_unqualified(self, attr: str) -> tuple[Binding, Attribute]:
        owners = [
            (b, a)
            for b in self.ordered
            if (a := b.event.attribute(attr)) is not None
        ]
        if not owners:
            raise UnknownAttributeError(f"no target declares attribute {attr!r}")
        if len(owners) > 1:
            aliases = ", ".join(b.alias for b, _ in owners)
            raise UnknownAttributeError(
                f"attribute {attr!r} is ambiguous across targets ({aliases})"
            )
        return owners[0]

    def resolve(self, ref: AttrRef) -> tuple[Binding, Attribute]:
        if ref.alias is None:
            return self.resolve_unqualified(ref.attr)
        return self.resolve_qualified(ref.alias, ref.attr)


def resolve(model: RuleModel, alias: str, attr: str) -> Attribute:
    """Attribute bound at ``alias.attr``; raises when either name is unknown."""
    _, attribute = Scope(model).resolve_qualified(alias, attr)
    return attribute


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------


def normal_number(value: int | float | None) -> int | float | None:
    """Drop trailing zeros: integral floats become ints."""
    if isinstance(value, float) and not isinstance(value, bool) and value.is_integer():
        return int(value)
    return value


def _canon_operand(op: Operand) -> Operand:
    if isinstance(op, Literal):
        if isinstance(op.value, float):
            return Literal(normal_number(op.value))
        return op
    if isinstance(op, AggCall) or isinstance(op, AttrRef):
        return op
    if isinstance(op, ScalarFn):
        return replace(op, args=tuple(_canon_operand(a) for a in op.args))
    if isinstance(op, ArithExpr):
        return ArithExpr(_canon_expression(op.expr))
    return op


def _canon_expression(expr: Expression) -> Expression:
    if isinstance(expr, Compare):
        return replace(expr, lhs=_canon_operand(expr.lhs), rhs=_canon_operand(expr.rhs))
    if isinstance(expr, Logical):
        return replace(expr, children=tuple(_canon_expression(c) for c in expr.children))
    if isinstance(expr, Arith):
        return replace(expr, lhs=_canon_operand(expr.lhs), rhs=_canon_operand(expr.rhs))
    return expr


def _canon_pattern(node: PatternNode) -> PatternNode:
    guard = node.guard
    if guard is not None:
        guard = replace(guard, seconds=normal_number(guard.seconds))
    repetition = node.repetition
    if repetition is not None:
        changes = {}
        if repetition.condition is not None:
            changes["condition"] = _canon_expression(repetition.condition)
        if repetition.until_child is not None:
            changes["until_child"] = _canon_pattern(repetition.until_child)
        if changes:
            repetition = replace(repetition, **changes)
    if isinstance(node, EventRef):
        filt = _canon_expression(node.filter) if node.filter is not None else None
        return replace(node, filter=filt, guard=guard, repetition=repetition)
    if isinstance(node, Not):
        return replace(node, child=_canon_pattern(node.child), guard=guard, repetition=repetition)
    if isinstance(node, (And, Or, FollowedBy)):
        children = tuple(_canon_pattern(c) for c in node.children)
        return replace(node, children=children, guard=guard, repetition=repetition)
    return node


def canonicalize(model: RuleModel) -> RuleModel:
    """Deterministic normal form: defaulted aliases, normalized numerics.

    Idempotent; target order is preserved. Raises :class:`AliasCollisionError`
    when alias defaulting produces duplicates.
    """
    targets = []
    seen: dict[str, int] = {}
    for index, target in enumerate(model.targets):
        alias = effective_alias(target)
        if alias in seen:
            raise AliasCollisionError(
                f"targets[{seen[alias]}] and targets[{index}] share alias {alias!r}"
            )
        seen[alias] = index
        window = target.window
        if window is not None and window.seconds is not None:
            window = replace(window, seconds=normal_number(window.seconds))
        targets.append(replace(target, alias=alias, window=window))

    return replace(
        model,
        targets=tuple(targets),
        pattern=_canon_pattern(model.pattern) if model.pattern is not None else None,
        bring=tuple(
            replace(item, expr=item.expr if isinstance(item.expr, Star) else _canon_operand(item.expr))
            for item in model.bring
        ),
        condition=_canon_expression(model.condition) if model.condition is not None else None,
    )
