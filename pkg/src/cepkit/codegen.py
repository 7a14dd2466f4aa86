"""Rule model to query text.

Two targets: EPL (full construct coverage) and a deliberately small DRL
subset (single target, timer/counter window, plain condition). Both are
pure functions of the model; identical models yield identical bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidModelError, UnsupportedConstructError
from .model import (
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
    Literal,
    Logical,
    LogicalOp,
    Not,
    Operand,
    Or,
    PatternNode,
    RepetitionKind,
    RuleModel,
    ScalarFn,
    ScalarFnName,
    Scope,
    Star,
    Window,
    WindowKind,
)
from .validation import validate


@dataclass(frozen=True)
class GeneratedSource:
    """Generated query text plus its whitespace-normalized form."""

    target: str  # "epl" | "drl"
    text: str

    @property
    def canonical_text(self) -> str:
        return normalize_text(self.text)


def normalize_text(text: str) -> str:
    """Collapse runs of blanks to single spaces, per line; trim edges."""
    lines = [" ".join(line.split()) for line in text.splitlines()]
    while lines and not lines[0]:
        lines.pop(0)
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


# Words compared case-insensitively when diffing queries. Identifiers stay
# verbatim so a miscased alias still fails the comparison.
_EPL_KEYWORDS = frozenset(
    """
    select insert into from where group by as pattern every not and or
    until while sec win time length keepall std groupwin timer within
    withinmax avg sum min max count true false
    """.split()
)

_TOKEN_RE = re.compile(
    r"'(?:\\.|[^'\\])*'"  # string literal
    r"|[A-Za-z_]\w*"      # identifier / keyword
    r"|\d+(?:\.\d+)?"     # number
    r"|->|>=|<=|!="       # multi-char operators
    r"|\S"                # any remaining punctuation
)


def epl_tokens(text: str) -> list[str]:
    """Token stream for comparing queries modulo layout and keyword case."""
    tokens = []
    for token in _TOKEN_RE.findall(text):
        lowered = token.lower()
        tokens.append(lowered if lowered in _EPL_KEYWORDS else token)
    return tokens


def render_operand(op: Operand) -> str:
    """EPL spelling of one operand; doubles as the unaliased column name."""
    return _EPL.operand(op)


def format_number(value: int | float) -> str:
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# Shared expression rendering
# ---------------------------------------------------------------------------


class _Dialect:
    eq = "="
    string_quote = "'"
    and_sep = " and "
    or_sep = " or "

    def ref(self, ref: AttrRef) -> str:
        if ref.alias is None:
            return ref.attr
        return f"{ref.alias}.{ref.attr}"

    def negate(self, rendered: str) -> str:
        return f"not {rendered}"

    def string(self, value: str) -> str:
        q = self.string_quote
        escaped = value.replace("\\", "\\\\").replace(q, "\\" + q)
        return f"{q}{escaped}{q}"

    def operand(self, op: Operand) -> str:
        if isinstance(op, AttrRef):
            return self.ref(op)
        if isinstance(op, Literal):
            v = op.value
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, (int, float)):
                return format_number(v)
            return self.string(v)
        if isinstance(op, AggCall):
            if op.target is None:
                return "count(*)"
            return f"{op.fn.value}({self.ref(op.target)})"
        if isinstance(op, ScalarFn):
            name = {ScalarFnName.MAX2: "max", ScalarFnName.MIN2: "min"}[op.fn]
            return f"{name}({self.operand(op.args[0])}, {self.operand(op.args[1])})"
        if isinstance(op, ArithExpr):
            return self.expression(op.expr)
        raise TypeError(f"unexpected operand: {op!r}")

    def expression(self, expr: Expression) -> str:
        if isinstance(expr, Compare):
            op = self.eq if expr.op.value == "=" else expr.op.value
            return f"{self.operand(expr.lhs)} {op} {self.operand(expr.rhs)}"
        if isinstance(expr, Arith):
            return f"({self.operand(expr.lhs)} {expr.op.value} {self.operand(expr.rhs)})"
        if isinstance(expr, Logical):
            if expr.op is LogicalOp.NOT:
                return self.negate(self.expression(expr.children[0]))
            sep = self.and_sep if expr.op is LogicalOp.AND else self.or_sep
            return "(" + sep.join(self.expression(c) for c in expr.children) + ")"
        raise TypeError(f"unexpected expression: {expr!r}")


class _DrlDialect(_Dialect):
    eq = "=="
    string_quote = '"'
    and_sep = " && "
    or_sep = " || "

    def ref(self, ref: AttrRef) -> str:
        return ref.attr  # single-target subset; qualification is noise

    def negate(self, rendered: str) -> str:
        if rendered.startswith("("):
            return f"!{rendered}"
        return f"!({rendered})"


_EPL = _Dialect()
_DRL = _DrlDialect()


# ---------------------------------------------------------------------------
# EPL
# ---------------------------------------------------------------------------


def _window_suffix(window: Window) -> str:
    if window.kind is WindowKind.TIMER:
        return f".win:time({format_number(window.seconds)} sec)"
    if window.kind is WindowKind.COUNTER:
        return f".win:length({window.count})"
    return ".win:keepall()"


def _target_source(target) -> str:
    text = target.event_name
    if target.group_win is not None:
        text += f".std:groupwin({','.join(target.group_win)})"
    if target.window is not None:
        text += _window_suffix(target.window)
    if target.alias is not None:
        text += f" as {target.alias}"
    return text


def generate_pattern_fragment(
    pattern: PatternNode, events: Mapping[str, str] | None = None
) -> str:
    """Pattern sub-expression text.

    ``events`` maps a pattern alias to its event type name; a missing entry
    falls back to the alias spelled as written, which only happens when the
    fragment is rendered outside a full model.
    """
    events = events or {}

    def atom(node: EventRef) -> str:
        event = events.get(node.alias, node.alias)
        body = _EPL.expression(node.filter) if node.filter is not None else ""
        return f"{node.capture}={event}({body})"

    def render(node: PatternNode) -> str:
        if isinstance(node, EventRef):
            text = atom(node)
        elif isinstance(node, Not):
            text = f"not {render(node.child)}"
        else:
            sep = {And: " and ", Or: " or ", FollowedBy: " -> "}[type(node)]
            # combinators are always parenthesized: correctness over prettiness
            text = "(" + sep.join(render(c) for c in node.children) + ")"

        rep = node.repetition
        if rep is not None:
            if rep.kind is RepetitionKind.EVERY:
                text = f"every {text}"
            elif rep.kind is RepetitionKind.EVERY_DISTINCT:
                keys = ",".join(_EPL.operand(k) for k in rep.distinct_keys)
                text = f"every-distinct({keys}) {text}"
            elif rep.kind is RepetitionKind.RANGE:
                text = f"[{rep.low}:{rep.high}] {text}"
            elif rep.kind is RepetitionKind.WHILE_COND:
                text = f"{text} while ({_EPL.expression(rep.condition)})"
            elif rep.kind is RepetitionKind.UNTIL:
                text = f"{text} until {render(rep.until_child)}"

        guard = node.guard
        if guard is not None:
            seconds = format_number(guard.seconds)
            if guard.kind is GuardKind.WITH_IN:
                text = f"{text} where timer:within({seconds} sec)"
            else:
                text = f"{text} where timer:withinmax({seconds} sec, {guard.max_instances})"
        return text

    return render(pattern)


def _select_list(model: RuleModel, dialect: _Dialect) -> str:
    parts = []
    for item in model.bring:
        if isinstance(item.expr, Star):
            rendered = "*"
        else:
            rendered = dialect.operand(item.expr)
        if item.output_alias is not None:
            rendered += f" as {item.output_alias}"
        parts.append(rendered)
    return ", ".join(parts)


def generate_epl(model: RuleModel) -> GeneratedSource:
    """EPL query for a clean model; raises on outstanding diagnostics."""
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)

    query = f"select {_select_list(model, _EPL)}"
    if model.pattern is not None:
        events = {
            alias: binding.target.event_name
            for alias, binding in Scope(model).bindings.items()
        }
        query += f" from pattern [{generate_pattern_fragment(model.pattern, events)}]"
    else:
        query += " from " + ", ".join(_target_source(t) for t in model.targets)
    if model.condition is not None:
        query += f" where {_EPL.expression(model.condition)}"
    if model.group_by is not None:
        query += " group by " + ", ".join(_EPL.ref(k) for k in model.group_by.keys)

    if model.output is not None:
        text = f"insert into {model.output.name}\n{query}"
    else:
        text = query
    return GeneratedSource("epl", text)


# ---------------------------------------------------------------------------
# DRL subset
# ---------------------------------------------------------------------------


def _reject(path: str, message: str) -> None:
    raise UnsupportedConstructError(path, message)


def _drl_window(window: Window, path: str) -> str:
    if window.kind is WindowKind.TIMER:
        return f" over window:time({format_number(window.seconds)}s)"
    if window.kind is WindowKind.COUNTER:
        return f" over window:length({window.count})"
    _reject(path, "keep-all windows have no sliding-window equivalent here")


def _check_drl_condition(expr: Expression | Operand, path: str) -> None:
    if isinstance(expr, (AggCall, ScalarFn)):
        _reject(path, "function calls are not translated in conditions")
    elif isinstance(expr, ArithExpr):
        _check_drl_condition(expr.expr, path)
    elif isinstance(expr, (Compare, Arith)):
        _check_drl_condition(expr.lhs, path)
        _check_drl_condition(expr.rhs, path)
    elif isinstance(expr, Logical):
        for child in expr.children:
            _check_drl_condition(child, path)


def generate_drl(model: RuleModel) -> GeneratedSource:
    """DRL rule for the single-target slice of the language.

    Joins, patterns, grouping, derived-event output and keep-all windows
    have no counterpart in this subset and raise with the offending path.
    """
    diagnostics = validate(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)

    if len(model.targets) > 1:
        _reject("targets[1]", "joins are not part of the DRL subset")
    if model.pattern is not None:
        _reject("pattern", "patterns are not part of the DRL subset")
    if model.group_by is not None:
        _reject("group_by", "grouping is not part of the DRL subset")
    if model.output is not None:
        _reject("output", "derived-event output is not part of the DRL subset")

    target = model.targets[0]
    if target.group_win is not None:
        _reject("targets[0].group_win", "partitioned windows are not supported")

    over = ""
    if target.window is not None:
        over = _drl_window(target.window, "targets[0].window")

    constraints = ""
    if model.condition is not None:
        _check_drl_condition(model.condition, "condition")
        cond = model.condition
        if isinstance(cond, Logical) and cond.op is not LogicalOp.NOT:
            # the constraint slot is already a conjunction context
            sep = " && " if cond.op is LogicalOp.AND else " || "
            constraints = sep.join(_DRL.expression(c) for c in cond.children)
        else:
            constraints = _DRL.expression(cond)

    text = (
        f'rule "{model.name}"\n'
        "when\n"
        f'    $e : {target.event_name}({constraints}){over} from entry-point "in"\n'
        "then\n"
        "end"
    )
    return GeneratedSource("drl", text)
