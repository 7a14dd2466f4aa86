"""Incremental pattern matching.

One attempt is live at a time. Refs bind greedily to the first eligible
event; FollowedBy children activate only after the previous child has
completed, so the completing event itself is never reused downstream.
With `every` at the root the attempt restarts after a completed match or
a kill (exclusive of the consuming event) and after a guard expiry
(inclusive: the expiry logically precedes the event that revealed it).
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from ..errors import UnsupportedConstructError
from ..model import (
    AggCall,
    And,
    Arith,
    ArithExpr,
    AttrRef,
    Compare,
    EventRef,
    Expression,
    FollowedBy,
    GuardKind,
    Logical,
    Not,
    Operand,
    Or,
    PatternNode,
    RepetitionKind,
    RuleModel,
    ScalarFn,
    Scope,
)
from .evaluator import RowContext, evaluate_predicate

if TYPE_CHECKING:
    from .session import TimedEvent


class Arrival:
    """An event plus its position in the push order."""

    __slots__ = ("seq", "event")

    def __init__(self, seq: int, event: "TimedEvent"):
        self.seq = seq
        self.event = event

    def __repr__(self):
        return f"Arrival({self.seq}, {self.event!r})"


# ---------------------------------------------------------------------------
# Subset gate
# ---------------------------------------------------------------------------


def _expr_has_aggregate(expr: Expression | Operand) -> bool:
    if isinstance(expr, AggCall):
        return True
    if isinstance(expr, ArithExpr):
        return _expr_has_aggregate(expr.expr)
    if isinstance(expr, (Compare, Arith)):
        return _expr_has_aggregate(expr.lhs) or _expr_has_aggregate(expr.rhs)
    if isinstance(expr, Logical):
        return any(_expr_has_aggregate(c) for c in expr.children)
    if isinstance(expr, ScalarFn):
        return any(_expr_has_aggregate(a) for a in expr.args)
    return False


def ensure_pattern_supported(model: RuleModel) -> None:
    """Reject pattern constructs the interpreter has no semantics for."""

    def reject(path: str, message: str):
        raise UnsupportedConstructError(path, message)

    def check_filter(node: EventRef, path: str, earlier: frozenset[str]) -> None:
        if node.filter is None:
            return
        allowed = earlier | {node.capture}
        for ref in _filter_refs(node.filter):
            if ref.alias is not None and ref.alias not in allowed:
                reject(
                    f"{path}.filter",
                    f"filter may only reference earlier sequence steps, "
                    f"not {ref.alias!r}",
                )

    def walk(node: PatternNode, path: str, root: bool, earlier: frozenset[str]):
        if node.repetition is not None:
            if node.repetition.kind is not RepetitionKind.EVERY:
                reject(
                    f"{path}.repetition",
                    f"{node.repetition.kind.value} repetition is generate-only",
                )
            if not root:
                reject(f"{path}.repetition", "every is supported at the root only")
        if node.guard is not None:
            if node.guard.kind is GuardKind.WITH_IN_MAX:
                reject(f"{path}.guard", "withinmax guards are generate-only")
            if not root:
                reject(f"{path}.guard", "guards are supported at the root only")

        if isinstance(node, EventRef):
            check_filter(node, path, earlier)
        elif isinstance(node, Not):
            reject(path, "negation is supported only directly inside an and-block")
        elif isinstance(node, And):
            positives = [c for c in node.children if not isinstance(c, Not)]
            if not positives:
                reject(path, "an and-block needs at least one non-negated member")
            for i, child in enumerate(node.children):
                child_path = f"{path}.children[{i}]"
                if isinstance(child, Not):
                    if child.guard is not None:
                        reject(f"{child_path}.guard", "guards are supported at the root only")
                    if child.repetition is not None:
                        reject(f"{child_path}.repetition", "every is supported at the root only")
                    if not isinstance(child.child, EventRef):
                        reject(f"{child_path}.child", "negation applies to a single event")
                    check_filter(child.child, f"{child_path}.child", earlier)
                else:
                    walk(child, child_path, False, earlier)
        elif isinstance(node, Or):
            for i, child in enumerate(node.children):
                walk(child, f"{path}.children[{i}]", False, earlier)
        elif isinstance(node, FollowedBy):
            seen = earlier
            for i, child in enumerate(node.children):
                walk(child, f"{path}.children[{i}]", False, seen)
                seen = seen | _tags_of(child)

    walk(model.pattern, "pattern", True, frozenset())


def _tags_of(node: PatternNode) -> frozenset[str]:
    if isinstance(node, EventRef):
        return frozenset((node.capture,))
    if isinstance(node, Not):
        return _tags_of(node.child)
    return frozenset().union(*(_tags_of(c) for c in node.children))


def _filter_refs(expr: Expression | Operand) -> list[AttrRef]:
    if isinstance(expr, AttrRef):
        return [expr]
    if isinstance(expr, (Compare, Arith)):
        return _filter_refs(expr.lhs) + _filter_refs(expr.rhs)
    if isinstance(expr, Logical):
        return [r for c in expr.children for r in _filter_refs(c)]
    if isinstance(expr, ArithExpr):
        return _filter_refs(expr.expr)
    if isinstance(expr, ScalarFn):
        return [r for a in expr.args for r in _filter_refs(a)]
    return []


# ---------------------------------------------------------------------------
# Match states
# ---------------------------------------------------------------------------

ALIVE = "alive"
COMPLETE = "complete"
KILLED = "killed"


class _FilterContext(RowContext):
    def __init__(self, attempt: "_Attempt", capture: str, candidate: Arrival):
        self.attempt = attempt
        self.capture = capture
        self.candidate = candidate

    def value_of(self, ref: AttrRef):
        if ref.alias is None or ref.alias == self.capture:
            return self.candidate.event.attrs[ref.attr]
        bound = self.attempt.bindings().get(ref.alias)
        if bound is None:
            return None
        return bound.event.attrs[ref.attr]

    def aggregate(self, call):
        raise RuntimeError("aggregates cannot appear in pattern filters")


class _Attempt:
    def __init__(self, matcher: "PatternMatcher"):
        self.matcher = matcher
        self.first_ts: int | None = None
        self.root = _make_state(matcher.root_node, self)

    def note_binding(self, arrival: Arrival) -> None:
        if self.first_ts is None:
            self.first_ts = arrival.event.timestamp

    def matches_ref(self, node: EventRef, arrival: Arrival) -> bool:
        if arrival.event.type_name != self.matcher.event_of[node.alias]:
            return False
        if node.filter is None:
            return True
        ctx = _FilterContext(self, node.capture, arrival)
        return evaluate_predicate(node.filter, ctx)

    def bindings(self) -> dict[str, Arrival]:
        return self.root.bindings()


class _RefState:
    def __init__(self, node: EventRef, attempt: _Attempt):
        self.node = node
        self.attempt = attempt
        self.arrival: Arrival | None = None

    def offer(self, arrival: Arrival) -> str:
        if self.attempt.matches_ref(self.node, arrival):
            self.arrival = arrival
            self.attempt.note_binding(arrival)
            return COMPLETE
        return ALIVE

    def bindings(self) -> dict[str, Arrival]:
        if self.arrival is None:
            return {}
        return {self.node.capture: self.arrival}


class _AndState:
    def __init__(self, node: And, attempt: _Attempt):
        self.attempt = attempt
        self.absent = [c.child for c in node.children if isinstance(c, Not)]
        self.pending = [
            _make_state(c, attempt) for c in node.children if not isinstance(c, Not)
        ]
        self.done: list = []

    def offer(self, arrival: Arrival) -> str:
        # a forbidden event kills before anything can complete on it
        for ref in self.absent:
            if self.attempt.matches_ref(ref, arrival):
                return KILLED
        still = []
        for child in self.pending:
            result = child.offer(arrival)
            if result == KILLED:
                return KILLED
            if result == COMPLETE:
                self.done.append(child)
            else:
                still.append(child)
        self.pending = still
        return COMPLETE if not self.pending else ALIVE

    def bindings(self) -> dict[str, Arrival]:
        merged: dict[str, Arrival] = {}
        for child in self.done:
            merged.update(child.bindings())
        return merged


class _OrState:
    def __init__(self, node: Or, attempt: _Attempt):
        self.children = [_make_state(c, attempt) for c in node.children]
        self.dead = [False] * len(self.children)
        self.winner = None

    def offer(self, arrival: Arrival) -> str:
        completed = []
        for i, child in enumerate(self.children):
            if self.dead[i]:
                continue
            result = child.offer(arrival)
            if result == KILLED:
                self.dead[i] = True
            elif result == COMPLETE:
                completed.append(child)
        if completed:
            self.winner = completed[0]  # declaration order decides ties
            return COMPLETE
        if all(self.dead):
            return KILLED
        return ALIVE

    def bindings(self) -> dict[str, Arrival]:
        if self.winner is None:
            return {}
        return self.winner.bindings()


class _SeqState:
    def __init__(self, node: FollowedBy, attempt: _Attempt):
        self.children = [_make_state(c, attempt) for c in node.children]
        self.cursor = 0

    def offer(self, arrival: Arrival) -> str:
        result = self.children[self.cursor].offer(arrival)
        if result == KILLED:
            return KILLED
        if result == COMPLETE:
            self.cursor += 1
            if self.cursor == len(self.children):
                return COMPLETE
        return ALIVE

    def bindings(self) -> dict[str, Arrival]:
        merged: dict[str, Arrival] = {}
        for child in self.children[: self.cursor]:
            merged.update(child.bindings())
        return merged


def _make_state(node: PatternNode, attempt: _Attempt):
    if isinstance(node, EventRef):
        return _RefState(node, attempt)
    if isinstance(node, And):
        return _AndState(node, attempt)
    if isinstance(node, Or):
        return _OrState(node, attempt)
    if isinstance(node, FollowedBy):
        return _SeqState(node, attempt)
    raise TypeError(f"unexpected pattern node: {node!r}")


class PatternMatcher:
    """Drives one attempt chain over the pushed stream."""

    def __init__(self, model: RuleModel, scope: Scope):
        self.root_node = model.pattern
        self.event_of = {
            alias: binding.target.event_name
            for alias, binding in scope.bindings.items()
        }
        guard = model.pattern.guard
        self.guard_ms = guard.seconds * 1000 if guard is not None else None
        rep = model.pattern.repetition
        self.every = rep is not None and rep.kind is RepetitionKind.EVERY
        self.attempt: _Attempt | None = _Attempt(self)

    def _restart(self) -> None:
        self.attempt = _Attempt(self) if self.every else None

    def push(self, arrival: Arrival) -> dict[str, Arrival] | None:
        """Bindings of a match completed by this event, else None."""
        if self.attempt is None:
            return None
        if (
            self.guard_ms is not None
            and self.attempt.first_ts is not None
            and arrival.event.timestamp - self.attempt.first_ts >= self.guard_ms
        ):
            # expiry precedes the event, which may open the next attempt
            self._restart()
            if self.attempt is None:
                return None
        result = self.attempt.root.offer(arrival)
        if result == COMPLETE:
            bindings = self.attempt.bindings()
            self._restart()
            return bindings
        if result == KILLED:
            self._restart()
        return None
