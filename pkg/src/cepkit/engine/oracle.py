"""Brute-force reference interpreter.

Recomputes everything from scratch at each stream position: window
contents by rescanning the prefix, joins by full enumeration, pattern
matches by recursive search over the remaining suffix. Slow on purpose
and written separately from the session so the two can check each other;
only preconditions, event admission and column naming are shared.
"""

from __future__ import annotations

from itertools import product

from ..codegen import render_operand
from ..errors import StreamError
from ..model import (
    AggCall,
    AggFn,
    And,
    Arith,
    ArithExpr,
    ArithOp,
    AttrRef,
    Compare,
    EventRef,
    FollowedBy,
    GuardKind,
    Literal,
    Logical,
    LogicalOp,
    Not,
    Or,
    RepetitionKind,
    RuleModel,
    ScalarFn,
    ScalarFnName,
    Star,
    WindowKind,
    pattern_refs,
)
from .session import OutputRow, TimedEvent, check_event, ensure_supported

_INF = float("inf")


def oracle(model: RuleModel, events: list[TimedEvent]) -> list[OutputRow]:
    ensure_supported(model)
    _admit(model, events)
    if model.pattern is not None:
        return _pattern_rows(model, events)
    return _window_rows(model, events)


def _admit(model: RuleModel, events: list[TimedEvent]) -> None:
    types = {e.name: e for e in model.events}
    previous = None
    for event in events:
        if event.timestamp < 0:
            raise StreamError(f"negative timestamp: {event.timestamp}")
        if previous is not None and event.timestamp < previous:
            raise StreamError(
                f"out-of-order timestamp {event.timestamp} after {previous}"
            )
        declared = types.get(event.type_name)
        if declared is None:
            raise StreamError(f"undeclared event type: {event.type_name!r}")
        check_event(event, declared)
        previous = event.timestamp


# ---------------------------------------------------------------------------
# Expression evaluation (value lookup abstracted as `look(alias, attr)`)
# ---------------------------------------------------------------------------


def _value(op, look, group=None):
    match op:
        case AttrRef(alias=alias, attr=attr):
            return look(alias, attr)
        case Literal(value=v):
            return v
        case AggCall(fn=fn, target=target):
            return _fold(fn, target, group or [])
        case ScalarFn(fn=fn, args=(a, b)):
            left, right = _value(a, look, group), _value(b, look, group)
            if left is None or right is None:
                return None
            return max(left, right) if fn is ScalarFnName.MAX2 else min(left, right)
        case ArithExpr(expr=inner):
            return _number(inner, look, group)
    raise TypeError(f"unexpected operand: {op!r}")


def _number(expr: Arith, look, group):
    left, right = _value(expr.lhs, look, group), _value(expr.rhs, look, group)
    if left is None or right is None:
        return None
    match expr.op:
        case ArithOp.ADD:
            return left + right
        case ArithOp.SUB:
            return left - right
        case ArithOp.MUL:
            return left * right
        case ArithOp.DIV:
            return None if right == 0 else left / right


def _truth(expr, look) -> bool:
    match expr:
        case Compare(op=op, lhs=lhs, rhs=rhs):
            left, right = _value(lhs, look), _value(rhs, look)
            if left is None or right is None:
                return False
            match op.value:
                case "=":
                    return left == right
                case "!=":
                    return left != right
                case "<":
                    return left < right
                case "<=":
                    return left <= right
                case ">":
                    return left > right
                case ">=":
                    return left >= right
        case Logical(op=LogicalOp.NOT, children=(child,)):
            return not _truth(child, look)
        case Logical(op=LogicalOp.AND, children=children):
            return all(_truth(c, look) for c in children)
        case Logical(op=LogicalOp.OR, children=children):
            return any(_truth(c, look) for c in children)
    raise TypeError(f"unexpected expression: {expr!r}")


def _fold(fn: AggFn, target, group_values):
    values = [v for v in group_values if v is not None]
    match fn:
        case AggFn.COUNT:
            return len(values)
        case _ if not values:
            return None
        case AggFn.SUM:
            return sum(values)
        case AggFn.AVG:
            return sum(values) / len(values)
        case AggFn.MAX:
            return max(values)
        case AggFn.MIN:
            return min(values)


def _has_agg(expr) -> bool:
    match expr:
        case AggCall():
            return True
        case ArithExpr(expr=inner):
            return _has_agg(inner)
        case Compare(lhs=lhs, rhs=rhs) | Arith(lhs=lhs, rhs=rhs):
            return _has_agg(lhs) or _has_agg(rhs)
        case Logical(children=children):
            return any(_has_agg(c) for c in children)
        case ScalarFn(args=args):
            return any(_has_agg(a) for a in args)
    return False


def _plain_refs(expr) -> list[AttrRef]:
    match expr:
        case AttrRef():
            return [expr]
        case ScalarFn(args=args):
            return [r for a in args for r in _plain_refs(a)]
        case ArithExpr(expr=inner):
            return _plain_refs(inner)
        case Compare(lhs=lhs, rhs=rhs) | Arith(lhs=lhs, rhs=rhs):
            return _plain_refs(lhs) + _plain_refs(rhs)
        case Logical(children=children):
            return [r for c in children for r in _plain_refs(c)]
    return []


# ---------------------------------------------------------------------------
# Window / join path
# ---------------------------------------------------------------------------


def _window_rows(model: RuleModel, events: list[TimedEvent]) -> list[OutputRow]:
    aliases = [t.alias or t.event_name.lower() for t in model.targets]
    slot_attrs = [
        {a.name for e in model.events if e.name == t.event_name for a in e.attributes}
        for t in model.targets
    ]

    def slot_of(alias: str | None, attr: str) -> int:
        if alias is not None:
            return aliases.index(alias)
        owners = [i for i, names in enumerate(slot_attrs) if attr in names]
        return owners[0]

    def looker(row):
        return lambda alias, attr: row[slot_of(alias, attr)][1].attrs[attr]

    def agg_inputs(call: AggCall, rows):
        if call.target is None:
            return [1] * len(rows)
        slot = slot_of(call.target.alias, call.target.attr)
        return [row[slot][1].attrs[call.target.attr] for row in rows]

    def eval_item(op, row, rows):
        look = looker(row)

        def value(node):
            match node:
                case AggCall():
                    return _fold(node.fn, node.target, agg_inputs(node, rows))
                case ScalarFn(args=(a, b), fn=fn):
                    left, right = value(a), value(b)
                    if left is None or right is None:
                        return None
                    return max(left, right) if fn is ScalarFnName.MAX2 else min(left, right)
                case ArithExpr(expr=Arith() as inner):
                    return _arith_with(inner, value)
                case _:
                    return _value(node, look)

        return value(op)

    def _arith_with(expr: Arith, value):
        left, right = value(expr.lhs), value(expr.rhs)
        if left is None or right is None:
            return None
        match expr.op:
            case ArithOp.ADD:
                return left + right
            case ArithOp.SUB:
                return left - right
            case ArithOp.MUL:
                return left * right
            case ArithOp.DIV:
                return None if right == 0 else left / right

    aggregate_only = any(
        not isinstance(item.expr, Star) and _has_agg(item.expr) for item in model.bring
    ) and all(
        not isinstance(item.expr, Star) and not _plain_refs(item.expr)
        for item in model.bring
    )

    lone = len(model.targets) == 1
    schemas = {e.name: e for e in model.events}

    def star_columns(row, values):
        for slot, target in enumerate(model.targets):
            for attribute in schemas[target.event_name].attributes:
                name = attribute.name if lone else f"{aliases[slot]}.{attribute.name}"
                values[name] = row[slot][1].attrs[attribute.name]

    def emit(row, rows, now):
        values: dict[str, object] = {}
        for item in model.bring:
            if isinstance(item.expr, Star):
                star_columns(row, values)
            else:
                name = item.output_alias or render_operand(item.expr)
                values[name] = eval_item(item.expr, row, rows)
        name = model.output.name if model.output is not None else None
        return OutputRow(now, values, name)

    out: list[OutputRow] = []
    for i, event in enumerate(events):
        now = event.timestamp
        prefix = list(enumerate(events[: i + 1]))
        per_target = [
            _retained(prefix, target, now) for target in model.targets
        ]
        all_rows = [
            row
            for row in product(*per_target)
            if model.condition is None or _truth(model.condition, looker(row))
        ]
        all_rows.sort(key=lambda row: tuple(idx for idx, _ in row))
        fresh = [row for row in all_rows if any(idx == i for idx, _ in row)]
        if not fresh:
            continue
        if model.group_by is not None:
            keys = model.group_by.keys
            seen: list[tuple] = []
            for row in fresh:
                key = tuple(looker(row)(k.alias, k.attr) for k in keys)
                if key not in seen:
                    seen.append(key)
            for key in seen:
                members = [
                    row
                    for row in all_rows
                    if tuple(looker(row)(k.alias, k.attr) for k in keys) == key
                ]
                first = next(
                    row
                    for row in fresh
                    if tuple(looker(row)(k.alias, k.attr) for k in keys) == key
                )
                out.append(emit(first, members, now))
        elif aggregate_only:
            out.append(emit(fresh[0], all_rows, now))
        else:
            out.extend(emit(row, all_rows, now) for row in fresh)
    return out


def _retained(prefix, target, now):
    mine = [(i, e) for i, e in prefix if e.type_name == target.event_name]
    if target.group_win is not None:
        groups: dict[tuple, list] = {}
        for i, e in mine:
            groups.setdefault(tuple(e.attrs[k] for k in target.group_win), []).append(
                (i, e)
            )
        kept = [
            pair for part in groups.values() for pair in _keep(part, target.window, now)
        ]
        kept.sort()
        return kept
    return _keep(mine, target.window, now)


def _keep(items, window, now):
    if window is None or window.kind is WindowKind.KEEP_ALL:
        return items
    if window.kind is WindowKind.TIMER:
        horizon = window.seconds * 1000
        return [(i, e) for i, e in items if now - e.timestamp < horizon]
    return items[-window.count :]


# ---------------------------------------------------------------------------
# Pattern path
# ---------------------------------------------------------------------------


def _pattern_rows(model: RuleModel, events: list[TimedEvent]) -> list[OutputRow]:
    n = len(events)
    alias_event = {}
    for target in model.targets:
        alias_event[target.alias or target.event_name.lower()] = target.event_name
    schemas = {e.name: e for e in model.events}
    captures = [r.capture for r in pattern_refs(model.pattern)]
    ref_by_capture = {r.capture: r for r in pattern_refs(model.pattern)}

    owner_of: dict[str, str] = {}
    counts: dict[str, int] = {}
    for ref in pattern_refs(model.pattern):
        for attribute in schemas[alias_event[ref.alias]].attributes:
            counts[attribute.name] = counts.get(attribute.name, 0) + 1
            owner_of.setdefault(attribute.name, ref.capture)
    owner_of = {k: v for k, v in owner_of.items() if counts[k] == 1}

    def eligible(j: int, ref: EventRef, env: dict[str, int]) -> bool:
        event = events[j]
        if event.type_name != alias_event[ref.alias]:
            return False
        if ref.filter is None:
            return True

        def look(alias, attr):
            if alias is None or alias == ref.capture:
                return event.attrs[attr]
            bound = env.get(alias)
            return None if bound is None else events[bound].attrs[attr]

        return _truth(ref.filter, look)

    def complete(node, lo: int, env: dict[str, int]):
        match node:
            case EventRef():
                for j in range(lo, n):
                    if eligible(j, node, env):
                        return ("match", j, {node.capture: j})
                return ("pending", None, None)
            case FollowedBy(children=children):
                cursor, binds = lo, {}
                done = lo - 1
                for child in children:
                    kind, idx, sub = complete(child, cursor, {**env, **binds})
                    if kind != "match":
                        return (kind, idx, None)
                    binds.update(sub)
                    done = idx
                    cursor = idx + 1
                return ("match", done, binds)
            case And(children=children):
                positives = [c for c in children if not isinstance(c, Not)]
                vetoes = [c.child for c in children if isinstance(c, Not)]
                results = [complete(c, lo, env) for c in positives]
                kill_at = [
                    idx for kind, idx, _ in results if kind == "kill"
                ]
                for veto in vetoes:
                    hit = next(
                        (j for j in range(lo, n) if eligible(j, veto, env)), None
                    )
                    if hit is not None:
                        kill_at.append(hit)
                first_kill = min(kill_at) if kill_at else None
                if all(kind == "match" for kind, _, _ in results):
                    done = max(idx for _, idx, _ in results)
                    if first_kill is not None and first_kill <= done:
                        return ("kill", first_kill, None)
                    merged: dict[str, int] = {}
                    for _, _, sub in results:
                        merged.update(sub)
                    return ("match", done, merged)
                if first_kill is not None:
                    return ("kill", first_kill, None)
                return ("pending", None, None)
            case Or(children=children):
                results = [complete(c, lo, env) for c in children]
                matched = [
                    (idx, sub) for kind, idx, sub in results if kind == "match"
                ]
                if matched:
                    best = min(idx for idx, _ in matched)
                    _, sub = next(pair for pair in matched if pair[0] == best)
                    return ("match", best, sub)
                if all(kind == "kill" for kind, _, _ in results):
                    return ("kill", max(idx for _, idx, _ in results), None)
                return ("pending", None, None)
        raise TypeError(f"unexpected pattern node: {node!r}")

    def first_bound(node, lo: int) -> float:
        match node:
            case EventRef():
                return next(
                    (j for j in range(lo, n) if eligible(j, node, {})), _INF
                )
            case FollowedBy(children=children):
                return first_bound(children[0], lo)
            case And(children=children):
                return min(
                    (
                        first_bound(c, lo)
                        for c in children
                        if not isinstance(c, Not)
                    ),
                    default=_INF,
                )
            case Or(children=children):
                return min((first_bound(c, lo) for c in children), default=_INF)
        raise TypeError(f"unexpected pattern node: {node!r}")

    guard = model.pattern.guard
    guard_ms = (
        guard.seconds * 1000
        if guard is not None and guard.kind is GuardKind.WITH_IN
        else None
    )
    rep = model.pattern.repetition
    repeats = rep is not None and rep.kind is RepetitionKind.EVERY

    matches: list[tuple[int, dict[str, int]]] = []
    start = 0
    while start < n:
        kind, idx, binds = complete(model.pattern, start, {})
        death = None
        if guard_ms is not None:
            first = first_bound(model.pattern, start)
            if first is not _INF:
                born = events[first].timestamp
                death = next(
                    (
                        j
                        for j in range(int(first) + 1, n)
                        if events[j].timestamp - born >= guard_ms
                    ),
                    None,
                )
        if death is not None and (kind == "pending" or death <= idx):
            if not repeats:
                break
            start = death  # the expiring event may seed the next attempt
            continue
        if kind == "pending":
            break
        if kind == "kill":
            if not repeats:
                break
            start = idx + 1
            continue
        matches.append((idx, binds))
        if not repeats:
            break
        start = idx + 1

    out: list[OutputRow] = []
    for done, binds in matches:
        def look(alias, attr, binds=binds):
            tag = alias if alias is not None else owner_of.get(attr)
            bound = binds.get(tag) if tag is not None else None
            return None if bound is None else events[bound].attrs[attr]

        if model.condition is not None and not _truth(model.condition, look):
            continue
        values: dict[str, object] = {}
        for item in model.bring:
            if isinstance(item.expr, Star):
                for tag in captures:
                    bound = binds.get(tag)
                    values[tag] = dict(events[bound].attrs) if bound is not None else None
            else:
                name = item.output_alias or render_operand(item.expr)
                values[name] = _value(item.expr, look)
        derived = model.output.name if model.output is not None else None
        out.append(OutputRow(events[done].timestamp, values, derived))
    return out
