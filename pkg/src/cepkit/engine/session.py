"""Stream interpreter for rule models.

Logical time only: "now" is the timestamp of the event being pushed, and
outputs follow insert-stream semantics (rows are emitted when an event
enters a window, never when one leaves). A timer window drops an event
once now - ts >= seconds * 1000.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

from ..codegen import render_operand
from ..errors import InvalidModelError, StreamError, UnsupportedConstructError
from ..model import (
    AggCall,
    AttrRef,
    AttributeKind,
    EventType,
    RuleModel,
    Scope,
    SelectItem,
    Star,
    TargetBinding,
    WindowKind,
    pattern_refs,
)
from ..validation import free_refs, validate
from .evaluator import (
    RowContext,
    aggregate_values,
    evaluate_operand,
    evaluate_predicate,
)
from .patterns import (
    Arrival,
    PatternMatcher,
    _expr_has_aggregate,
    ensure_pattern_supported,
)


@dataclass(frozen=True)
class TimedEvent:
    type_name: str
    timestamp: int
    attrs: Mapping[str, object] = field(default_factory=dict)


@dataclass
class OutputRow:
    emitted_at: int
    values: dict[str, object]
    derived_event_name: str | None = None


# ---------------------------------------------------------------------------
# Preconditions
# ---------------------------------------------------------------------------


def ensure_supported(model: RuleModel) -> None:
    """Gate shared by the session and the reference interpreter."""
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)
    if len(model.targets) > 3:
        raise UnsupportedConstructError(
            "targets[3]", "joins are limited to three targets"
        )
    if model.condition is not None and _expr_has_aggregate(model.condition):
        raise UnsupportedConstructError(
            "condition", "aggregates in conditions are generate-only"
        )
    if model.pattern is not None:
        ensure_pattern_supported(model)
        if model.group_by is not None:
            raise UnsupportedConstructError(
                "group_by", "grouping does not combine with patterns here"
            )
        for i, item in enumerate(model.bring):
            if not isinstance(item.expr, Star) and _expr_has_aggregate(item.expr):
                raise UnsupportedConstructError(
                    f"bring[{i}]", "aggregates over pattern matches are generate-only"
                )


_TYPE_OK = {
    AttributeKind.INTEGER: lambda v: type(v) is int,
    AttributeKind.FLOAT: lambda v: type(v) in (int, float),
    AttributeKind.STRING: lambda v: isinstance(v, str),
    AttributeKind.BOOLEAN: lambda v: type(v) is bool,
    AttributeKind.TIMESTAMP: lambda v: type(v) is int,
}


def check_event(event: TimedEvent, event_type: EventType) -> None:
    declared = {a.name: a.kind for a in event_type.attributes}
    if set(event.attrs) != set(declared):
        raise StreamError(
            f"event {event.type_name!r} attrs {sorted(event.attrs)} do not match "
            f"schema {sorted(declared)}"
        )
    for name, kind in declared.items():
        if not _TYPE_OK[kind](event.attrs[name]):
            raise StreamError(
                f"attribute {name!r} of {event.type_name!r} is not {kind.value}: "
                f"{event.attrs[name]!r}"
            )


# ---------------------------------------------------------------------------
# Window buffers
# ---------------------------------------------------------------------------


class _Buffer:
    """Per-target retention; keyed sub-buffers under group_win."""

    def __init__(self, target: TargetBinding):
        self.window = target.window  # None behaves like keep-all
        self.group_attrs = target.group_win
        self.parts: dict[tuple, deque[Arrival]] = {}

    def _key(self, event: TimedEvent) -> tuple:
        if self.group_attrs is None:
            return ()
        return tuple(event.attrs[a] for a in self.group_attrs)

    def insert(self, arrival: Arrival) -> None:
        part = self.parts.setdefault(self._key(arrival.event), deque())
        part.append(arrival)
        if self.window is not None and self.window.kind is WindowKind.COUNTER:
            while len(part) > self.window.count:
                part.popleft()

    def evict(self, now: int) -> None:
        if self.window is None or self.window.kind is not WindowKind.TIMER:
            return
        horizon = self.window.seconds * 1000
        for part in self.parts.values():
            while part and now - part[0].event.timestamp >= horizon:
                part.popleft()

    def contents(self) -> list[Arrival]:
        if len(self.parts) == 1:
            return list(next(iter(self.parts.values())))
        merged = [a for part in self.parts.values() for a in part]
        merged.sort(key=lambda a: a.seq)
        return merged


# ---------------------------------------------------------------------------
# Row contexts
# ---------------------------------------------------------------------------


class _JoinContext(RowContext):
    def __init__(self, session: "Session", row, universe):
        self.session = session
        self.row = row
        self.universe = universe

    def value_of(self, ref: AttrRef):
        pos, attr = self.session._position(ref)
        return self.row[pos].event.attrs[attr]

    def aggregate(self, call: AggCall):
        if call.target is None:
            return len(self.universe)
        pos, attr = self.session._position(call.target)
        return aggregate_values(
            call.fn, [r[pos].event.attrs[attr] for r in self.universe]
        )


class _MatchContext(RowContext):
    def __init__(self, session: "Session", bindings: dict[str, Arrival]):
        self.session = session
        self.bindings = bindings

    def value_of(self, ref: AttrRef):
        tag = ref.alias if ref.alias is not None else self.session._owner_tag[ref.attr]
        bound = self.bindings.get(tag)
        if bound is None:
            return None
        return bound.event.attrs[ref.attr]

    def aggregate(self, call: AggCall):
        raise RuntimeError("aggregates cannot appear in pattern rules")


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------


class Session:
    """Single-writer interpreter state for one rule model."""

    def __init__(self, model: RuleModel):
        ensure_supported(model)
        self.model = model
        self.scope = Scope(model)
        self.last_seen_timestamp: int | None = None
        self._seq = 0
        self._types = {e.name: e for e in model.events}
        self._positions: dict[tuple[str | None, str], tuple[int, str]] = {}
        self._index_to_pos = {
            b.index: pos for pos, b in enumerate(self.scope.ordered)
        }

        if model.pattern is None:
            self._buffers = [_Buffer(t) for t in model.targets]
            self._matcher = None
            self._captures: list[str] = []
            self._owner_tag: dict[str, str] = {}
        else:
            self._buffers = []
            self._matcher = PatternMatcher(model, self.scope)
            self._captures = [r.capture for r in pattern_refs(model.pattern)]
            self._owner_tag = self._build_owner_map()

        self._has_aggregates = any(
            not isinstance(item.expr, Star) and _expr_has_aggregate(item.expr)
            for item in model.bring
        )
        # fold mode: one row per push, aggregates over the whole result set
        self._folds = (
            self._has_aggregates
            and model.group_by is None
            and all(
                not isinstance(item.expr, Star) and not free_refs(item.expr)
                for item in model.bring
            )
        )

    # -- lookups ------------------------------------------------------------

    def _position(self, ref: AttrRef) -> tuple[int, str]:
        key = (ref.alias, ref.attr)
        hit = self._positions.get(key)
        if hit is None:
            binding, attribute = self.scope.resolve(ref)
            hit = (self._index_to_pos[binding.index], attribute.name)
            self._positions[key] = hit
        return hit

    def _build_owner_map(self) -> dict[str, str]:
        owners: dict[str, str] = {}
        seen: dict[str, int] = {}
        for ref in pattern_refs(self.model.pattern):
            binding = self.scope.bindings[ref.alias]
            for attribute in binding.event.attributes:
                seen[attribute.name] = seen.get(attribute.name, 0) + 1
                owners.setdefault(attribute.name, ref.capture)
        return {name: tag for name, tag in owners.items() if seen[name] == 1}

    # -- push ---------------------------------------------------------------

    def push(self, event: TimedEvent) -> list[OutputRow]:
        if event.timestamp < 0:
            raise StreamError(f"negative timestamp: {event.timestamp}")
        if (
            self.last_seen_timestamp is not None
            and event.timestamp < self.last_seen_timestamp
        ):
            raise StreamError(
                f"out-of-order timestamp {event.timestamp} after "
                f"{self.last_seen_timestamp}"
            )
        event_type = self._types.get(event.type_name)
        if event_type is None:
            raise StreamError(f"undeclared event type: {event.type_name!r}")
        check_event(event, event_type)
        self.last_seen_timestamp = event.timestamp

        arrival = Arrival(self._seq, event)
        self._seq += 1
        if self._matcher is not None:
            return self._push_pattern(arrival)
        return self._push_windows(arrival)

    def window_contents(self, index: int) -> tuple[TimedEvent, ...]:
        """Current retention of one target buffer, oldest first."""
        if not self._buffers:
            return ()
        return tuple(a.event for a in self._buffers[index].contents())

    # -- window path --------------------------------------------------------

    def _push_windows(self, arrival: Arrival) -> list[OutputRow]:
        now = arrival.event.timestamp
        for buffer in self._buffers:
            buffer.evict(now)
        hit = [
            i
            for i, target in enumerate(self.model.targets)
            if target.event_name == arrival.event.type_name
        ]
        for i in hit:
            self._buffers[i].insert(arrival)
        if not hit:
            return []

        universes = [buffer.contents() for buffer in self._buffers]
        new_rows = self._rows_containing(universes, arrival, hit)
        condition = self.model.condition
        if condition is not None:
            new_rows = [
                row
                for row in new_rows
                if evaluate_predicate(condition, _JoinContext(self, row, []))
            ]
        if not new_rows:
            return []

        needs_full = self._has_aggregates or self.model.group_by is not None
        full = None
        if needs_full:
            full = [row for row in product(*universes)]
            if condition is not None:
                full = [
                    row
                    for row in full
                    if evaluate_predicate(condition, _JoinContext(self, row, []))
                ]

        if self.model.group_by is not None:
            return self._emit_groups(now, new_rows, full)
        if self._folds:
            return [self._emit_row(now, new_rows[0], full)]
        return [self._emit_row(now, row, full or []) for row in new_rows]

    def _rows_containing(self, universes, arrival: Arrival, hit: list[int]):
        rows = []
        for j in hit:
            pools = []
            for k, universe in enumerate(universes):
                if k == j:
                    pools.append([arrival])
                elif k in hit and k < j:
                    # rows where the new event sits only in a later slot;
                    # keeps the union over slots disjoint
                    pools.append([a for a in universe if a.seq != arrival.seq])
                else:
                    pools.append(universe)
            rows.extend(product(*pools))
        rows.sort(key=lambda row: tuple(a.seq for a in row))
        return rows

    def _group_key(self, row) -> tuple:
        ctx = _JoinContext(self, row, [])
        return tuple(ctx.value_of(k) for k in self.model.group_by.keys)

    def _emit_groups(self, now: int, new_rows, full) -> list[OutputRow]:
        order: list[tuple] = []
        representative = {}
        for row in new_rows:
            key = self._group_key(row)
            if key not in representative:
                representative[key] = row
                order.append(key)
        by_group: dict[tuple, list] = {key: [] for key in order}
        for row in full:
            key = self._group_key(row)
            if key in by_group:
                by_group[key].append(row)
        return [
            self._emit_row(now, representative[key], by_group[key]) for key in order
        ]

    def _emit_row(self, now: int, row, universe) -> OutputRow:
        ctx = _JoinContext(self, row, universe)
        values: dict[str, object] = {}
        for item in self.model.bring:
            if isinstance(item.expr, Star):
                self._expand_star(row, values)
            else:
                values[_column_name(item)] = evaluate_operand(item.expr, ctx)
        return OutputRow(now, values, _derived(self.model))

    def _expand_star(self, row, values: dict) -> None:
        lone = len(self.scope.ordered) == 1
        for pos, binding in enumerate(self.scope.ordered):
            for attribute in binding.event.attributes:
                name = attribute.name if lone else f"{binding.alias}.{attribute.name}"
                values[name] = row[pos].event.attrs[attribute.name]

    # -- pattern path -------------------------------------------------------

    def _push_pattern(self, arrival: Arrival) -> list[OutputRow]:
        bindings = self._matcher.push(arrival)
        if bindings is None:
            return []
        ctx = _MatchContext(self, bindings)
        condition = self.model.condition
        if condition is not None and not evaluate_predicate(condition, ctx):
            return []
        values: dict[str, object] = {}
        for item in self.model.bring:
            if isinstance(item.expr, Star):
                for tag in self._captures:
                    bound = bindings.get(tag)
                    values[tag] = dict(bound.event.attrs) if bound else None
            else:
                values[_column_name(item)] = evaluate_operand(item.expr, ctx)
        return [OutputRow(arrival.event.timestamp, values, _derived(self.model))]


def _column_name(item: SelectItem) -> str:
    if item.output_alias is not None:
        return item.output_alias
    return render_operand(item.expr)


def _derived(model: RuleModel) -> str | None:
    return model.output.name if model.output is not None else None


def open_session(model: RuleModel) -> Session:
    return Session(model)


def run_stream(model: RuleModel, events: Iterable[TimedEvent]) -> list[OutputRow]:
    session = open_session(model)
    rows: list[OutputRow] = []
    for event in events:
        rows.extend(session.push(event))
    return rows
