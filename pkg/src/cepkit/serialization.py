"""Reading and writing ``.ceprule.json`` documents.

A document is a single JSON object::

    {"format_version": "1.0", "rule": {...}, "editor_meta": {...}}

``rule`` mirrors :class:`cepkit.model.RuleModel` field for field.
Expression nodes are tagged by ``kind`` (attr, lit, agg, call, arith,
compare, logical), pattern nodes by ``node`` (event, and, or, seq, not);
the select-list wildcard is the string ``"*"``. ``editor_meta`` is
carried verbatim and never interpreted.

Serialization is canonical: fixed key order, two-space indentation, a
trailing newline. Parsing is structural only; semantic problems are the
validator's job. Unknown keys fail the parse, and as many independent
problems as possible are collected before giving up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, NoReturn

from .errors import DocumentFormatError
from .model import (
    AggCall,
    AggFn,
    And,
    Arith,
    ArithExpr,
    ArithOp,
    Attribute,
    AttributeKind,
    AttrRef,
    Compare,
    CompareOp,
    EventRef,
    EventType,
    FollowedBy,
    GroupBySpec,
    GuardKind,
    Literal,
    Logical,
    LogicalOp,
    Not,
    Or,
    OutputSpec,
    PatternGuard,
    PatternNode,
    RepetitionKind,
    RepetitionSpec,
    RuleModel,
    ScalarFn,
    ScalarFnName,
    SelectItem,
    Star,
    STAR,
    TargetBinding,
    Window,
    WindowKind,
)

FORMAT_VERSION = "1.0"
FILE_SUFFIX = ".ceprule.json"


@dataclass(frozen=True)
class ParseIssue:
    """One problem found while reading a document."""

    path: str
    message: str
    line: int | None = None
    column: int | None = None

    def __str__(self) -> str:
        where = self.path or "document"
        if self.line is not None:
            where += f" (line {self.line}, column {self.column})"
        return f"{where}: {self.message}"


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _enc_operand(op) -> Any:
    if isinstance(op, AttrRef):
        return {"kind": "attr", "alias": op.alias, "attr": op.attr}
    if isinstance(op, Literal):
        return {"kind": "lit", "value": op.value}
    if isinstance(op, AggCall):
        return {
            "kind": "agg",
            "fn": op.fn.value,
            "of": None if op.target is None else _enc_operand(op.target),
        }
    if isinstance(op, ScalarFn):
        return {
            "kind": "call",
            "fn": op.fn.value,
            "args": [_enc_operand(a) for a in op.args],
        }
    if isinstance(op, ArithExpr):
        return _enc_operand(op.expr)
    if isinstance(op, Arith):
        return {
            "kind": "arith",
            "op": op.op.value,
            "lhs": _enc_operand(op.lhs),
            "rhs": _enc_operand(op.rhs),
        }
    if isinstance(op, Compare):
        return {
            "kind": "compare",
            "op": op.op.value,
            "lhs": _enc_operand(op.lhs),
            "rhs": _enc_operand(op.rhs),
        }
    if isinstance(op, Logical):
        return {
            "kind": "logical",
            "op": op.op.value,
            "children": [_enc_operand(c) for c in op.children],
        }
    raise TypeError(f"unencodable expression: {op!r}")


def _enc_window(w: Window | None) -> Any:
    if w is None:
        return None
    if w.kind is WindowKind.TIMER:
        return {"kind": "timer", "seconds": w.seconds}
    if w.kind is WindowKind.COUNTER:
        return {"kind": "counter", "count": w.count}
    return {"kind": "keep_all"}


def _enc_guard(g: PatternGuard | None) -> Any:
    if g is None:
        return None
    out = {"kind": g.kind.value, "seconds": g.seconds}
    if g.kind is GuardKind.WITH_IN_MAX:
        out["max_instances"] = g.max_instances
    return out


def _enc_repetition(r: RepetitionSpec | None) -> Any:
    if r is None:
        return None
    out: dict[str, Any] = {"kind": r.kind.value}
    if r.kind is RepetitionKind.EVERY_DISTINCT:
        out["keys"] = [_enc_operand(k) for k in r.distinct_keys]
    elif r.kind is RepetitionKind.RANGE:
        out["low"] = r.low
        out["high"] = r.high
    elif r.kind is RepetitionKind.WHILE_COND:
        out["condition"] = _enc_operand(r.condition)
    elif r.kind is RepetitionKind.UNTIL:
        out["until"] = _enc_pattern(r.until_child)
    return out


def _enc_pattern(node: PatternNode | None) -> Any:
    if node is None:
        return None
    if isinstance(node, EventRef):
        out: dict[str, Any] = {
            "node": "event",
            "alias": node.alias,
            "filter": None if node.filter is None else _enc_operand(node.filter),
            "tag": node.tag,
        }
    elif isinstance(node, Not):
        out = {"node": "not", "child": _enc_pattern(node.child)}
    else:
        tags = {And: "and", Or: "or", FollowedBy: "seq"}
        out = {
            "node": tags[type(node)],
            "children": [_enc_pattern(c) for c in node.children],
        }
    out["guard"] = _enc_guard(node.guard)
    out["repetition"] = _enc_repetition(node.repetition)
    return out


def _enc_rule(model: RuleModel) -> dict[str, Any]:
    return {
        "name": model.name,
        "events": [
            {
                "name": e.name,
                "attributes": [
                    {"name": a.name, "kind": a.kind.value} for a in e.attributes
                ],
            }
            for e in model.events
        ],
        "targets": [
            {
                "event": t.event_name,
                "alias": t.alias,
                "window": _enc_window(t.window),
                "group_win": None if t.group_win is None else list(t.group_win),
            }
            for t in model.targets
        ],
        "pattern": _enc_pattern(model.pattern),
        "bring": [
            {
                "expr": "*" if isinstance(i.expr, Star) else _enc_operand(i.expr),
                "as": i.output_alias,
            }
            for i in model.bring
        ],
        "condition": None if model.condition is None else _enc_operand(model.condition),
        "group_by": None
        if model.group_by is None
        else {"keys": [_enc_operand(k) for k in model.group_by.keys]},
        "output": None if model.output is None else {"name": model.output.name},
    }


def serialize_model(model: RuleModel, editor_meta: Any = None) -> str:
    """Canonical document text: fixed key order, 2-space indent, one
    trailing newline. Identical models always yield identical bytes."""
    doc: dict[str, Any] = {"format_version": FORMAT_VERSION, "rule": _enc_rule(model)}
    if editor_meta is not None:
        doc["editor_meta"] = editor_meta
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------


class _Bail(Exception):
    """Abandons the enclosing document section after recording an issue."""


_OPERAND_KINDS = ("attr", "lit", "agg", "call", "arith")
_BOOLEAN_KINDS = _OPERAND_KINDS + ("compare", "logical")


class _Reader:
    def __init__(self) -> None:
        self.issues: list[ParseIssue] = []

    def fail(self, path: str, message: str) -> NoReturn:
        self.issues.append(ParseIssue(path, message))
        raise _Bail

    def obj(self, data, path, required=(), optional=()) -> dict:
        if not isinstance(data, dict):
            self.fail(path, f"expected an object, got {type(data).__name__}")
        for key in data:
            if key not in required and key not in optional:
                self.fail(f"{path}.{key}" if path else key, "unknown key")
        for key in required:
            if key not in data:
                self.fail(path, f"missing required key {key!r}")
        return data

    def array(self, data, path) -> list:
        if not isinstance(data, list):
            self.fail(path, f"expected an array, got {type(data).__name__}")
        return data

    def string(self, data, path) -> str:
        if not isinstance(data, str):
            self.fail(path, f"expected a string, got {type(data).__name__}")
        return data

    def integer(self, data, path) -> int:
        if type(data) is not int:
            self.fail(path, f"expected an integer, got {type(data).__name__}")
        return data

    def number(self, data, path):
        if type(data) not in (int, float):
            self.fail(path, f"expected a number, got {type(data).__name__}")
        return data

    def enum(self, cls, data, path, what):
        value = self.string(data, path)
        try:
            return cls(value)
        except ValueError:
            self.fail(path, f"unknown {what} {value!r}")

    # -- expressions --------------------------------------------------------

    def expr(self, data, path, boolean: bool):
        kinds = _BOOLEAN_KINDS if boolean else _OPERAND_KINDS
        head = self.obj(data, path, required=("kind",), optional=(
            "alias", "attr", "value", "fn", "of", "args", "op", "lhs", "rhs",
            "children",
        ))
        kind = self.string(head["kind"], f"{path}.kind")
        if kind not in kinds:
            self.fail(f"{path}.kind", f"unknown expression kind {kind!r}")
        handler = getattr(self, f"_expr_{kind}")
        return handler(head, path, boolean)

    def attr_ref(self, data, path) -> AttrRef:
        node = self.expr(data, path, boolean=False)
        if not isinstance(node, AttrRef):
            self.fail(path, "expected an attribute reference")
        return node

    def _expr_attr(self, data, path, boolean) -> AttrRef:
        self.obj(data, path, required=("kind", "attr"), optional=("alias",))
        alias = data.get("alias")
        if alias is not None:
            alias = self.string(alias, f"{path}.alias")
        return AttrRef(alias, self.string(data["attr"], f"{path}.attr"))

    def _expr_lit(self, data, path, boolean) -> Literal:
        self.obj(data, path, required=("kind", "value"))
        value = data["value"]
        if value is None or isinstance(value, (dict, list)):
            self.fail(f"{path}.value", "literal must be a string, number, or boolean")
        return Literal(value)

    def _expr_agg(self, data, path, boolean) -> AggCall:
        self.obj(data, path, required=("kind", "fn"), optional=("of",))
        fn = self.enum(AggFn, data["fn"], f"{path}.fn", "aggregation")
        of = data.get("of")
        target = None if of is None else self.attr_ref(of, f"{path}.of")
        return AggCall(fn, target)

    def _expr_call(self, data, path, boolean) -> ScalarFn:
        self.obj(data, path, required=("kind", "fn", "args"))
        fn = self.enum(ScalarFnName, data["fn"], f"{path}.fn", "function")
        args = self.array(data["args"], f"{path}.args")
        if len(args) != 2:
            self.fail(f"{path}.args", "scalar functions take exactly two arguments")
        return ScalarFn(
            fn,
            (
                self.expr(args[0], f"{path}.args[0]", boolean=False),
                self.expr(args[1], f"{path}.args[1]", boolean=False),
            ),
        )

    def _expr_arith(self, data, path, boolean):
        self.obj(data, path, required=("kind", "op", "lhs", "rhs"))
        node = Arith(
            self.enum(ArithOp, data["op"], f"{path}.op", "arithmetic operator"),
            self.expr(data["lhs"], f"{path}.lhs", boolean=False),
            self.expr(data["rhs"], f"{path}.rhs", boolean=False),
        )
        return node if boolean else ArithExpr(node)

    def _expr_compare(self, data, path, boolean) -> Compare:
        self.obj(data, path, required=("kind", "op", "lhs", "rhs"))
        return Compare(
            self.enum(CompareOp, data["op"], f"{path}.op", "comparison operator"),
            self.expr(data["lhs"], f"{path}.lhs", boolean=False),
            self.expr(data["rhs"], f"{path}.rhs", boolean=False),
        )

    def _expr_logical(self, data, path, boolean) -> Logical:
        self.obj(data, path, required=("kind", "op", "children"))
        op = self.enum(LogicalOp, data["op"], f"{path}.op", "logical operator")
        children = self.array(data["children"], f"{path}.children")
        return Logical(
            op,
            tuple(
                self.expr(c, f"{path}.children[{i}]", boolean=True)
                for i, c in enumerate(children)
            ),
        )

    # -- structure ----------------------------------------------------------

    def window(self, data, path) -> Window:
        head = self.obj(data, path, required=("kind",), optional=("seconds", "count"))
        kind = self.enum(WindowKind, head["kind"], f"{path}.kind", "window kind")
        if kind is WindowKind.TIMER:
            self.obj(data, path, required=("kind", "seconds"))
            return Window(kind, seconds=self.number(head["seconds"], f"{path}.seconds"))
        if kind is WindowKind.COUNTER:
            self.obj(data, path, required=("kind", "count"))
            return Window(kind, count=self.integer(head["count"], f"{path}.count"))
        self.obj(data, path, required=("kind",))
        return Window(kind)

    def target(self, data, path) -> TargetBinding:
        self.obj(data, path, required=("event",),
                 optional=("alias", "window", "group_win"))
        alias = data.get("alias")
        if alias is not None:
            alias = self.string(alias, f"{path}.alias")
        window = data.get("window")
        if window is not None:
            window = self.window(window, f"{path}.window")
        group_win = data.get("group_win")
        if group_win is not None:
            group_win = tuple(
                self.string(k, f"{path}.group_win[{i}]")
                for i, k in enumerate(self.array(group_win, f"{path}.group_win"))
            )
        return TargetBinding(
            self.string(data["event"], f"{path}.event"),
            alias=alias, window=window, group_win=group_win,
        )

    def event_type(self, data, path) -> EventType:
        self.obj(data, path, required=("name",), optional=("attributes",))
        attrs = []
        for i, a in enumerate(self.array(data.get("attributes", []),
                                         f"{path}.attributes")):
            apath = f"{path}.attributes[{i}]"
            self.obj(a, apath, required=("name", "kind"))
            attrs.append(Attribute(
                self.string(a["name"], f"{apath}.name"),
                self.enum(AttributeKind, a["kind"], f"{apath}.kind", "attribute kind"),
            ))
        return EventType(self.string(data["name"], f"{path}.name"), tuple(attrs))

    def guard(self, data, path) -> PatternGuard:
        head = self.obj(data, path, required=("kind", "seconds"),
                        optional=("max_instances",))
        kind = self.enum(GuardKind, head["kind"], f"{path}.kind", "guard kind")
        seconds = self.number(head["seconds"], f"{path}.seconds")
        if kind is GuardKind.WITH_IN_MAX:
            self.obj(data, path, required=("kind", "seconds", "max_instances"))
            return PatternGuard(kind, seconds,
                                self.integer(head["max_instances"],
                                             f"{path}.max_instances"))
        self.obj(data, path, required=("kind", "seconds"))
        return PatternGuard(kind, seconds)

    def repetition(self, data, path) -> RepetitionSpec:
        head = self.obj(data, path, required=("kind",),
                        optional=("keys", "low", "high", "condition", "until"))
        kind = self.enum(RepetitionKind, head["kind"], f"{path}.kind",
                         "repetition kind")
        if kind is RepetitionKind.EVERY_DISTINCT:
            self.obj(data, path, required=("kind", "keys"))
            keys = tuple(
                self.attr_ref(k, f"{path}.keys[{i}]")
                for i, k in enumerate(self.array(head["keys"], f"{path}.keys"))
            )
            return RepetitionSpec(kind, distinct_keys=keys)
        if kind is RepetitionKind.RANGE:
            self.obj(data, path, required=("kind",), optional=("low", "high"))
            low, high = head.get("low"), head.get("high")
            return RepetitionSpec(
                kind,
                low=None if low is None else self.integer(low, f"{path}.low"),
                high=None if high is None else self.integer(high, f"{path}.high"),
            )
        if kind is RepetitionKind.WHILE_COND:
            self.obj(data, path, required=("kind", "condition"))
            return RepetitionSpec(
                kind, condition=self.expr(head["condition"], f"{path}.condition",
                                          boolean=True),
            )
        if kind is RepetitionKind.UNTIL:
            self.obj(data, path, required=("kind", "until"))
            return RepetitionSpec(kind,
                                  until_child=self.pattern(head["until"],
                                                           f"{path}.until"))
        self.obj(data, path, required=("kind",))
        return RepetitionSpec(kind)

    def pattern(self, data, path) -> PatternNode:
        head = self.obj(data, path, required=("node",), optional=(
            "alias", "filter", "tag", "children", "child", "guard", "repetition",
        ))
        node_kind = self.string(head["node"], f"{path}.node")
        guard = head.get("guard")
        guard = None if guard is None else self.guard(guard, f"{path}.guard")
        rep = head.get("repetition")
        rep = None if rep is None else self.repetition(rep, f"{path}.repetition")

        if node_kind == "event":
            self.obj(data, path, required=("node", "alias"),
                     optional=("filter", "tag", "guard", "repetition"))
            filt = head.get("filter")
            tag = head.get("tag")
            return EventRef(
                self.string(head["alias"], f"{path}.alias"),
                filter=None if filt is None
                else self.expr(filt, f"{path}.filter", boolean=True),
                tag=None if tag is None else self.string(tag, f"{path}.tag"),
                guard=guard, repetition=rep,
            )
        if node_kind == "not":
            self.obj(data, path, required=("node", "child"),
                     optional=("guard", "repetition"))
            return Not(self.pattern(head["child"], f"{path}.child"),
                       guard=guard, repetition=rep)
        classes = {"and": And, "or": Or, "seq": FollowedBy}
        if node_kind not in classes:
            self.fail(f"{path}.node", f"unknown pattern node {node_kind!r}")
        self.obj(data, path, required=("node", "children"),
                 optional=("guard", "repetition"))
        children = tuple(
            self.pattern(c, f"{path}.children[{i}]")
            for i, c in enumerate(self.array(head["children"], f"{path}.children"))
        )
        return classes[node_kind](children, guard=guard, repetition=rep)

    def select_item(self, data, path) -> SelectItem:
        self.obj(data, path, required=("expr",), optional=("as",))
        raw = data["expr"]
        if raw == "*":
            expr = STAR
        else:
            expr = self.expr(raw, f"{path}.expr", boolean=False)
        out_alias = data.get("as")
        if out_alias is not None:
            out_alias = self.string(out_alias, f"{path}.as")
        return SelectItem(expr, output_alias=out_alias)


def parse_model(text: str) -> tuple[RuleModel, Any]:
    """Decode document text into ``(model, editor_meta)``.

    Raises :class:`DocumentFormatError` carrying every issue found; the
    model is parsed structurally and may still fail validation.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentFormatError(
            [ParseIssue("", f"invalid JSON: {err.msg}", err.lineno, err.colno)]
        ) from err
    return model_from_data(data)


def model_from_data(data: Any) -> tuple[RuleModel, Any]:
    """Decode an already-parsed document object; see :func:`parse_model`."""
    reader = _Reader()
    try:
        top = reader.obj(data, "", required=("format_version", "rule"),
                         optional=("editor_meta",))
    except _Bail:
        raise DocumentFormatError(reader.issues) from None

    version = top["format_version"]
    if version != FORMAT_VERSION:
        reader.issues.append(ParseIssue(
            "format_version", f"unsupported format_version {version!r}"))
    editor_meta = top.get("editor_meta")

    name = ""
    fields: dict[str, Any] = {}
    try:
        rule = reader.obj(top["rule"], "rule", required=("name",), optional=(
            "events", "targets", "pattern", "bring", "condition", "group_by",
            "output",
        ))
    except _Bail:
        raise DocumentFormatError(reader.issues) from None

    def section(key, decode):
        raw = rule.get(key)
        try:
            fields[key] = decode(raw)
        except _Bail:
            pass

    section("name", lambda raw: reader.string(rule["name"], "name"))
    section("events", lambda raw: tuple(
        reader.event_type(e, f"events[{i}]")
        for i, e in enumerate(reader.array(raw or [], "events"))))
    section("targets", lambda raw: tuple(
        reader.target(t, f"targets[{i}]")
        for i, t in enumerate(reader.array(raw or [], "targets"))))
    section("pattern", lambda raw: None if raw is None
            else reader.pattern(raw, "pattern"))
    section("bring", lambda raw: tuple(
        reader.select_item(s, f"bring[{i}]")
        for i, s in enumerate(reader.array(raw or [], "bring"))))
    section("condition", lambda raw: None if raw is None
            else reader.expr(raw, "condition", boolean=True))
    section("group_by", lambda raw: None if raw is None else GroupBySpec(tuple(
        reader.attr_ref(k, f"group_by.keys[{i}]")
        for i, k in enumerate(reader.array(
            reader.obj(raw, "group_by", required=("keys",))["keys"],
            "group_by.keys")))))
    section("output", lambda raw: None if raw is None else OutputSpec(
        reader.string(reader.obj(raw, "output",
                                 required=("name",))["name"],
                      "output.name")))

    if reader.issues:
        raise DocumentFormatError(reader.issues)

    name = fields.pop("name")
    return RuleModel(name=name, **fields), editor_meta
