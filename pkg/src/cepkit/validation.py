"""Diagnostic pass over rule models.

Implements rules V001-V012 as coded findings rather than exceptions so a
caller (notably the editor) gets the complete list in one shot:

  V001  at least one target                                 ERROR
  V002  unique event/attribute/alias/tag names              ERROR
  V003  targets reference declared events                   ERROR
  V004  attribute references resolve in scope               ERROR
  V005  avg/sum/min/max applied to numeric attributes only  ERROR
  V006  window parameters positive                          ERROR
  V007  pattern arity (not unary, combinators >= 2)         ERROR
  V008  guard durations positive                            ERROR
  V009  grouped queries select only keys or aggregates      ERROR
  V010  operand kinds compatible                            ERROR
  V011  repetition specs well-formed (range low <= high)    ERROR
  V012  unique select aliases                               ERROR

The original constraint set of the modeling tool this reconstructs is not
published; these twelve rules are this project's own reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import UnknownAliasError, UnknownAttributeError
from .model import (
    AggCall,
    AggFn,
    And,
    Arith,
    ArithExpr,
    AttrRef,
    Attribute,
    AttributeKind,
    Compare,
    EventRef,
    Expression,
    FollowedBy,
    GuardKind,
    Literal,
    Logical,
    LogicalOp,
    Not,
    NUMERIC_AGGS,
    Operand,
    Or,
    PatternNode,
    RepetitionKind,
    RuleModel,
    ScalarFn,
    Scope,
    Star,
    Window,
    WindowKind,
    pattern_refs,
)


@dataclass(frozen=True)
class Diagnostic:
    """A coded validation finding addressing one model location."""

    code: str
    severity: str  # "error" | "warning"; all current rules are errors
    path: str
    message: str


class ExprKind(str, Enum):
    NUMERIC = "numeric"
    STRING = "string"
    BOOLEAN = "boolean"
    TIMESTAMP = "timestamp"


_ATTR_TO_EXPR_KIND = {
    AttributeKind.INTEGER: ExprKind.NUMERIC,
    AttributeKind.FLOAT: ExprKind.NUMERIC,
    AttributeKind.STRING: ExprKind.STRING,
    AttributeKind.BOOLEAN: ExprKind.BOOLEAN,
    AttributeKind.TIMESTAMP: ExprKind.TIMESTAMP,
}

_NUMERICISH = frozenset(
    {AttributeKind.INTEGER, AttributeKind.FLOAT, AttributeKind.TIMESTAMP}
)


def kinds_compatible(a: ExprKind, b: ExprKind) -> bool:
    """Numeric pairs with numeric, timestamp with timestamp or numeric."""
    if a == b:
        return True
    pair = {a, b}
    return pair == {ExprKind.TIMESTAMP, ExprKind.NUMERIC}


# ---------------------------------------------------------------------------
# Reference resolution contexts
# ---------------------------------------------------------------------------


class _WindowContext:
    """Window/join rules: references resolve against target aliases."""

    def __init__(self, scope: Scope):
        self.scope = scope

    def resolve(self, ref: AttrRef) -> Attribute:
        _, attribute = self.scope.resolve(ref)
        return attribute

    def owner(self, ref: AttrRef) -> tuple[object, Attribute]:
        binding, attribute = self.scope.resolve(ref)
        return binding.index, attribute


class _PatternContext:
    """Pattern rules: references resolve against pattern capture tags."""

    def __init__(self, model: RuleModel, scope: Scope):
        self.captures: dict[str, object] = {}
        for ref in pattern_refs(model.pattern):
            binding = scope.bindings.get(ref.alias)
            if binding is not None and ref.capture not in self.captures:
                self.captures[ref.capture] = binding.event

    def resolve(self, ref: AttrRef) -> Attribute:
        return self.owner(ref)[1]

    def owner(self, ref: AttrRef) -> tuple[object, Attribute]:
        if ref.alias is not None:
            event = self.captures.get(ref.alias)
            if event is None:
                raise UnknownAliasError(f"unknown pattern tag: {ref.alias!r}")
            attribute = event.attribute(ref.attr)
            if attribute is None:
                raise UnknownAttributeError(
                    f"event {event.name!r} has no attribute {ref.attr!r}"
                )
            return ref.alias, attribute
        owners = [
            (tag, attribute)
            for tag, event in self.captures.items()
            if (attribute := event.attribute(ref.attr)) is not None
        ]
        if len(owners) != 1:
            raise UnknownAttributeError(
                f"attribute {ref.attr!r} does not resolve to exactly one capture"
            )
        return owners[0]


class _FilterContext:
    """Inside an event filter: unqualified names are the candidate's own."""

    def __init__(self, own_event, fallback: _PatternContext):
        self.own_event = own_event
        self.fallback = fallback

    def resolve(self, ref: AttrRef) -> Attribute:
        if ref.alias is None:
            if self.own_event is None:
                raise UnknownAliasError("filter has no resolvable event")
            attribute = self.own_event.attribute(ref.attr)
            if attribute is None:
                raise UnknownAttributeError(
                    f"event {self.own_event.name!r} has no attribute {ref.attr!r}"
                )
            return attribute
        return self.fallback.resolve(ref)


# ---------------------------------------------------------------------------
# Typing pass
# ---------------------------------------------------------------------------


class _Checker:
    def __init__(self, context):
        self.context = context
        self.findings: list[Diagnostic] = []

    def add(self, code: str, path: str, message: str) -> None:
        self.findings.append(Diagnostic(code, "error", path, message))

    # Returns None when the sub-expression could not be typed; the cause has
    # already been reported, so callers must not pile on.
    def operand(self, op: Operand, path: str) -> ExprKind | None:
        if isinstance(op, AttrRef):
            try:
                attribute = self.context.resolve(op)
            except (UnknownAliasError, UnknownAttributeError) as exc:
                self.add("V004", path, str(exc))
                return None
            return _ATTR_TO_EXPR_KIND[attribute.kind]
        if isinstance(op, Literal):
            return _ATTR_TO_EXPR_KIND[op.kind]
        if isinstance(op, AggCall):
            if op.target is None:
                if op.fn is not AggFn.COUNT:
                    self.add("V005", path, f"{op.fn.value}() requires a target attribute")
                    return None
                return ExprKind.NUMERIC
            try:
                attribute = self.context.resolve(op.target)
            except (UnknownAliasError, UnknownAttributeError) as exc:
                self.add("V004", f"{path}.target", str(exc))
                return None
            if op.fn in NUMERIC_AGGS and attribute.kind not in _NUMERICISH:
                self.add(
                    "V005",
                    path,
                    f"{op.fn.value}() needs a numeric attribute, "
                    f"{op.target.attr!r} is {attribute.kind.value}",
                )
                return None
            if op.fn is AggFn.COUNT:
                return ExprKind.NUMERIC
            if op.fn in (AggFn.MAX, AggFn.MIN):
                return _ATTR_TO_EXPR_KIND[attribute.kind]
            return ExprKind.NUMERIC
        if isinstance(op, ScalarFn):
            kinds = [
                self.operand(arg, f"{path}.args[{i}]") for i, arg in enumerate(op.args)
            ]
            if None in kinds:
                return None
            for i, kind in enumerate(kinds):
                if kind not in (ExprKind.NUMERIC, ExprKind.TIMESTAMP):
                    self.add(
                        "V010",
                        f"{path}.args[{i}]",
                        f"{op.fn.value} argument must be numeric, got {kind.value}",
                    )
                    return None
            if ExprKind.TIMESTAMP in kinds:
                return ExprKind.TIMESTAMP
            return ExprKind.NUMERIC
        if isinstance(op, ArithExpr):
            return self.expression(op.expr, path)
        raise TypeError(f"unexpected operand: {op!r}")

    def expression(self, expr: Expression, path: str) -> ExprKind | None:
        if isinstance(expr, Compare):
            lhs = self.operand(expr.lhs, f"{path}.lhs")
            rhs = self.operand(expr.rhs, f"{path}.rhs")
            if lhs is None or rhs is None:
                return None
            if not kinds_compatible(lhs, rhs):
                self.add(
                    "V010",
                    path,
                    f"cannot compare {lhs.value} with {rhs.value}",
                )
                return None
            return ExprKind.BOOLEAN
        if isinstance(expr, Logical):
            ok = True
            for i, child in enumerate(expr.children):
                kind = self.expression(child, f"{path}.children[{i}]")
                if kind is None:
                    ok = False
                elif kind is not ExprKind.BOOLEAN:
                    self.add(
                        "V010",
                        f"{path}.children[{i}]",
                        f"{expr.op.value} needs boolean operands, got {kind.value}",
                    )
                    ok = False
            if expr.op is LogicalOp.NOT and len(expr.children) != 1:
                self.add("V010", path, "not takes exactly one operand")
                ok = False
            if expr.op is not LogicalOp.NOT and len(expr.children) < 2:
                self.add("V010", path, f"{expr.op.value} takes at least two operands")
                ok = False
            return ExprKind.BOOLEAN if ok else None
        if isinstance(expr, Arith):
            lhs = self.operand(expr.lhs, f"{path}.lhs")
            rhs = self.operand(expr.rhs, f"{path}.rhs")
            if lhs is None or rhs is None:
                return None
            for side, kind in (("lhs", lhs), ("rhs", rhs)):
                if kind not in (ExprKind.NUMERIC, ExprKind.TIMESTAMP):
                    self.add(
                        "V010",
                        f"{path}.{side}",
                        f"arithmetic needs numeric operands, got {kind.value}",
                    )
                    return None
            return ExprKind.NUMERIC

        # operand at an expression position: type it for the message, but
        # only comparisons and logicals may stand on their own
        if self.operand(expr, path) is not None:
            self.add("V010", path, "expected a comparison or logical expression")
        return None

    def boolean_expression(self, expr: Expression, path: str) -> None:
        kind = self.expression(expr, path)
        if kind is not None and kind is not ExprKind.BOOLEAN:
            self.add("V010", path, f"expected a boolean condition, got {kind.value}")


def typecheck(expr: Expression, scope: RuleModel) -> ExprKind | list[Diagnostic]:
    """Result kind of ``expr`` in the model's scope, or the findings
    preventing typing."""
    checker = _Checker(_context_for(scope))
    kind = checker.expression(expr, "expr")
    if checker.findings:
        return _ordered(checker.findings)
    return kind


def _context_for(model: RuleModel):
    scope = Scope(model)
    if model.pattern is not None:
        return _PatternContext(model, scope)
    return _WindowContext(scope)


# ---------------------------------------------------------------------------
# Rule checks
# ---------------------------------------------------------------------------


def _check_names(model: RuleModel, checker: _Checker) -> None:
    seen_events: set[str] = set()
    for i, event in enumerate(model.events):
        if event.name in seen_events:
            checker.add("V002", f"events[{i}]", f"duplicate event name {event.name!r}")
        seen_events.add(event.name)
        seen_attrs: set[str] = set()
        for j, attribute in enumerate(event.attributes):
            if attribute.name in seen_attrs:
                checker.add(
                    "V002",
                    f"events[{i}].attributes[{j}]",
                    f"duplicate attribute name {attribute.name!r} in event {event.name!r}",
                )
            seen_attrs.add(attribute.name)

    seen_aliases: set[str] = set()
    for i, target in enumerate(model.targets):
        alias = target.alias if target.alias is not None else target.event_name.lower()
        if alias in seen_aliases:
            checker.add("V002", f"targets[{i}]", f"duplicate target alias {alias!r}")
        seen_aliases.add(alias)

    if model.pattern is not None:
        seen_tags: set[str] = set()
        for ref in pattern_refs(model.pattern):
            if ref.capture in seen_tags:
                checker.add(
                    "V002", "pattern", f"duplicate pattern tag {ref.capture!r}"
                )
            seen_tags.add(ref.capture)

    if model.output is not None and model.output.name in seen_events:
        checker.add(
            "V002",
            "output",
            f"output name {model.output.name!r} collides with a declared event",
        )


def _check_targets(model: RuleModel, checker: _Checker) -> None:
    if not model.targets:
        checker.add("V001", "targets", "a rule needs at least one target event")
    for i, target in enumerate(model.targets):
        event = model.event_type(target.event_name)
        if event is None:
            checker.add(
                "V003",
                f"targets[{i}]",
                f"target references undeclared event {target.event_name!r}",
            )
        if target.window is not None:
            _check_window(target.window, f"targets[{i}].window", checker)
        if target.group_win is not None and event is not None:
            for j, name in enumerate(target.group_win):
                if event.attribute(name) is None:
                    checker.add(
                        "V004",
                        f"targets[{i}].group_win[{j}]",
                        f"event {event.name!r} has no attribute {name!r}",
                    )


def _check_window(window: Window, path: str, checker: _Checker) -> None:
    if window.kind is WindowKind.TIMER:
        if window.seconds is None or window.seconds <= 0:
            checker.add("V006", path, "timer window needs seconds > 0")
    elif window.kind is WindowKind.COUNTER:
        if window.count is None or window.count < 1:
            checker.add("V006", path, "counter window needs count >= 1")
    else:
        if window.seconds is not None or window.count is not None:
            checker.add("V006", path, "keep-all window carries no parameter")


def _check_pattern(model: RuleModel, checker: _Checker, scope: Scope) -> None:
    pattern_context = _PatternContext(model, scope)

    def walk(node: PatternNode, path: str) -> None:
        if node.guard is not None:
            guard = node.guard
            if guard.seconds is None or guard.seconds <= 0:
                checker.add("V008", f"{path}.guard", "guard needs seconds > 0")
            if guard.kind is GuardKind.WITH_IN_MAX and (
                guard.max_instances is None or guard.max_instances < 1
            ):
                checker.add("V008", f"{path}.guard", "guard needs max instances >= 1")
        if node.repetition is not None:
            rep = node.repetition
            rep_path = f"{path}.repetition"
            if rep.kind is RepetitionKind.RANGE:
                if rep.low is None or rep.high is None or rep.low > rep.high:
                    checker.add("V011", rep_path, "range repetition needs low <= high")
            elif rep.kind is RepetitionKind.EVERY_DISTINCT:
                if not rep.distinct_keys:
                    checker.add("V011", rep_path, "every-distinct needs at least one key")
                for i, key in enumerate(rep.distinct_keys):
                    filter_checker = _Checker(pattern_context)
                    filter_checker.operand(key, f"{rep_path}.keys[{i}]")
                    checker.findings.extend(filter_checker.findings)
            elif rep.kind is RepetitionKind.WHILE_COND:
                if rep.condition is None:
                    checker.add("V011", rep_path, "while repetition needs a condition")
                else:
                    cond_checker = _Checker(pattern_context)
                    cond_checker.boolean_expression(rep.condition, f"{rep_path}.condition")
                    checker.findings.extend(cond_checker.findings)
            elif rep.kind is RepetitionKind.UNTIL:
                if rep.until_child is None:
                    checker.add("V011", rep_path, "until repetition needs a pattern")
                else:
                    walk(rep.until_child, f"{rep_path}.child")

        if isinstance(node, EventRef):
            binding = scope.bindings.get(node.alias)
            if binding is None:
                checker.add(
                    "V004", path, f"pattern references unknown target alias {node.alias!r}"
                )
            if node.filter is not None:
                own_event = binding.event if binding is not None else None
                filter_checker = _Checker(_FilterContext(own_event, pattern_context))
                filter_checker.boolean_expression(node.filter, f"{path}.filter")
                checker.findings.extend(filter_checker.findings)
        elif isinstance(node, Not):
            walk(node.child, f"{path}.child")
        elif isinstance(node, (And, Or, FollowedBy)):
            kind = {And: "and", Or: "or", FollowedBy: "followed-by"}[type(node)]
            if len(node.children) < 2:
                checker.add("V007", path, f"{kind} needs at least two children")
            for i, child in enumerate(node.children):
                walk(child, f"{path}.children[{i}]")

    walk(model.pattern, "pattern")


def free_refs(expr: Operand | Star) -> list[AttrRef]:
    """Attribute references not enclosed by an aggregation call."""
    if isinstance(expr, AttrRef):
        return [expr]
    if isinstance(expr, ScalarFn):
        return [ref for arg in expr.args for ref in free_refs(arg)]
    if isinstance(expr, ArithExpr):
        return _free_refs_expression(expr.expr)
    return []


def _free_refs_expression(expr: Expression) -> list[AttrRef]:
    if isinstance(expr, (Compare, Arith)):
        return free_refs(expr.lhs) + free_refs(expr.rhs)
    if isinstance(expr, Logical):
        return [ref for child in expr.children for ref in _free_refs_expression(child)]
    return []


def _check_bring(model: RuleModel, checker: _Checker, context) -> None:
    seen_aliases: set[str] = set()
    group_keys: set[tuple] = set()
    if model.group_by is not None:
        for key in model.group_by.keys:
            try:
                owner, attribute = context.owner(key)
            except (UnknownAliasError, UnknownAttributeError):
                continue  # V004 reported from the group_by walk
            group_keys.add((owner, attribute.name))

    def is_group_key(ref: AttrRef) -> bool:
        try:
            owner, attribute = context.owner(ref)
        except (UnknownAliasError, UnknownAttributeError):
            return True  # unresolvable; V004 already covers it
        return (owner, attribute.name) in group_keys

    for i, item in enumerate(model.bring):
        path = f"bring[{i}]"
        if item.output_alias is not None:
            if item.output_alias in seen_aliases:
                checker.add(
                    "V012", path, f"duplicate select alias {item.output_alias!r}"
                )
            seen_aliases.add(item.output_alias)
        if isinstance(item.expr, Star):
            if model.group_by is not None:
                checker.add(
                    "V009", path, "select * cannot be combined with group-by"
                )
            continue
        checker.operand(item.expr, path)
        if model.group_by is not None:
            for ref in free_refs(item.expr):
                if not is_group_key(ref):
                    checker.add(
                        "V009",
                        path,
                        f"non-aggregated select item references {ref.attr!r}, "
                        "which is not a group key",
                    )
                    break


def validate(model: RuleModel) -> list[Diagnostic]:
    """All findings for ``model``, ordered by path then code.

    Pure and deterministic: equal models produce identical lists. An empty
    result means the model is accepted downstream by generation and, subset
    permitting, execution.
    """
    scope = Scope(model)
    context = _context_for(model)
    checker = _Checker(context)

    _check_targets(model, checker)
    _check_names(model, checker)
    if model.pattern is not None:
        _check_pattern(model, checker, scope)
    if model.condition is not None:
        checker.boolean_expression(model.condition, "condition")
    if model.group_by is not None:
        for i, key in enumerate(model.group_by.keys):
            checker.operand(key, f"group_by.keys[{i}]")
    _check_bring(model, checker, context)

    return _ordered(checker.findings)


def _ordered(findings: list[Diagnostic]) -> list[Diagnostic]:
    unique = sorted(set(findings), key=lambda d: (d.path, d.code, d.message))
    return unique
