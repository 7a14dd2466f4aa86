// Wire types for `.ceprule.json` documents, mirroring the server format
// field for field. Expression nodes are tagged by `kind`, pattern nodes
// by `node`; the select-list wildcard is the string "*".
//
// Canonical text is JSON.stringify with two-space indent plus a trailing
// newline. The server rejects unknown keys and emits keys in a fixed
// order, so every object here must be built through the mk* helpers
// below: property insertion order is the serialization order.

export const FORMAT_VERSION = "1.0";
export const FILE_SUFFIX = ".ceprule.json";

export type AttributeKind = "integer" | "float" | "string" | "boolean" | "timestamp";
export type AggFnName = "avg" | "sum" | "max" | "min" | "count";
export type ScalarFnName = "max2" | "min2";
export type CompareOpName = "=" | "!=" | "<" | "<=" | ">" | ">=";
export type LogicalOpName = "and" | "or" | "not";
export type ArithOpName = "+" | "-" | "*" | "/";
export type LiteralValue = string | number | boolean;

export interface AttrDoc {
  kind: "attr";
  alias: string | null;
  attr: string;
}

export interface LitDoc {
  kind: "lit";
  value: LiteralValue;
}

export interface AggDoc {
  kind: "agg";
  fn: AggFnName;
  of: AttrDoc | null;
}

export interface CallDoc {
  kind: "call";
  fn: ScalarFnName;
  args: OperandDoc[];
}

export interface ArithDoc {
  kind: "arith";
  op: ArithOpName;
  lhs: OperandDoc;
  rhs: OperandDoc;
}

export interface CompareDoc {
  kind: "compare";
  op: CompareOpName;
  lhs: OperandDoc;
  rhs: OperandDoc;
}

export interface LogicalDoc {
  kind: "logical";
  op: LogicalOpName;
  children: ExprDoc[];
}

export type OperandDoc = AttrDoc | LitDoc | AggDoc | CallDoc | ArithDoc;
export type ExprDoc = OperandDoc | CompareDoc | LogicalDoc;

export interface AttributeDoc {
  name: string;
  kind: AttributeKind;
}

export interface EventTypeDoc {
  name: string;
  attributes: AttributeDoc[];
}

export type WindowDoc =
  | { kind: "timer"; seconds: number }
  | { kind: "counter"; count: number }
  | { kind: "keep_all" };

export interface TargetDoc {
  event: string;
  alias: string | null;
  window: WindowDoc | null;
  group_win: string[] | null;
}

export interface GuardDoc {
  kind: "with_in" | "with_in_max";
  seconds: number;
  max_instances?: number;
}

export interface RepetitionDoc {
  kind: "every" | "every_distinct" | "range" | "while" | "until";
  keys?: AttrDoc[];
  low?: number | null;
  high?: number | null;
  condition?: ExprDoc;
  until?: PatternDoc;
}

export interface EventNodeDoc {
  node: "event";
  alias: string;
  filter: ExprDoc | null;
  tag: string | null;
  guard: GuardDoc | null;
  repetition: RepetitionDoc | null;
}

export interface NotNodeDoc {
  node: "not";
  child: PatternDoc;
  guard: GuardDoc | null;
  repetition: RepetitionDoc | null;
}

export interface CombinatorNodeDoc {
  node: "and" | "or" | "seq";
  children: PatternDoc[];
  guard: GuardDoc | null;
  repetition: RepetitionDoc | null;
}

export type PatternDoc = EventNodeDoc | NotNodeDoc | CombinatorNodeDoc;

export interface SelectItemDoc {
  expr: OperandDoc | "*";
  as: string | null;
}

export interface RuleDoc {
  name: string;
  events: EventTypeDoc[];
  targets: TargetDoc[];
  pattern: PatternDoc | null;
  bring: SelectItemDoc[];
  condition: ExprDoc | null;
  group_by: { keys: AttrDoc[] } | null;
  output: { name: string } | null;
}

export interface RuleDocument {
  format_version: string;
  rule: RuleDoc;
  editor_meta?: unknown;
}

// -- constructors (fix the key order) ---------------------------------------

export function mkAttr(alias: string | null, attr: string): AttrDoc {
  return { kind: "attr", alias, attr };
}

export function mkLit(value: LiteralValue): LitDoc {
  return { kind: "lit", value };
}

export function mkAgg(fn: AggFnName, of: AttrDoc | null = null): AggDoc {
  return { kind: "agg", fn, of };
}

export function mkCall(fn: ScalarFnName, args: OperandDoc[]): CallDoc {
  return { kind: "call", fn, args };
}

export function mkArith(op: ArithOpName, lhs: OperandDoc, rhs: OperandDoc): ArithDoc {
  return { kind: "arith", op, lhs, rhs };
}

export function mkCompare(op: CompareOpName, lhs: OperandDoc, rhs: OperandDoc): CompareDoc {
  return { kind: "compare", op, lhs, rhs };
}

export function mkLogical(op: LogicalOpName, children: ExprDoc[]): LogicalDoc {
  return { kind: "logical", op, children };
}

export function mkEventType(name: string, attributes: AttributeDoc[]): EventTypeDoc {
  return {
    name,
    attributes: attributes.map((a) => ({ name: a.name, kind: a.kind })),
  };
}

export function mkTarget(
  event: string,
  alias: string | null,
  window: WindowDoc | null,
  groupWin: string[] | null,
): TargetDoc {
  return { event, alias, window, group_win: groupWin };
}

export function mkWindow(
  kind: WindowDoc["kind"],
  amount?: number,
): WindowDoc {
  if (kind === "timer") return { kind, seconds: amount ?? 0 };
  if (kind === "counter") return { kind, count: amount ?? 0 };
  return { kind };
}

export function mkGuard(
  kind: GuardDoc["kind"],
  seconds: number,
  maxInstances?: number,
): GuardDoc {
  const out: GuardDoc = { kind, seconds };
  if (kind === "with_in_max") out.max_instances = maxInstances ?? 0;
  return out;
}

export function mkEventNode(
  alias: string,
  filter: ExprDoc | null = null,
  tag: string | null = null,
  guard: GuardDoc | null = null,
  repetition: RepetitionDoc | null = null,
): EventNodeDoc {
  return { node: "event", alias, filter, tag, guard, repetition };
}

export function mkNotNode(
  child: PatternDoc,
  guard: GuardDoc | null = null,
  repetition: RepetitionDoc | null = null,
): NotNodeDoc {
  return { node: "not", child, guard, repetition };
}

export function mkCombinator(
  node: CombinatorNodeDoc["node"],
  children: PatternDoc[],
  guard: GuardDoc | null = null,
  repetition: RepetitionDoc | null = null,
): CombinatorNodeDoc {
  return { node, children, guard, repetition };
}

export function mkSelectItem(expr: OperandDoc | "*", as: string | null = null): SelectItemDoc {
  return { expr, as };
}

export function mkRule(fields: {
  name: string;
  events?: EventTypeDoc[];
  targets?: TargetDoc[];
  pattern?: PatternDoc | null;
  bring?: SelectItemDoc[];
  condition?: ExprDoc | null;
  groupBy?: { keys: AttrDoc[] } | null;
  output?: { name: string } | null;
}): RuleDoc {
  return {
    name: fields.name,
    events: fields.events ?? [],
    targets: fields.targets ?? [],
    pattern: fields.pattern ?? null,
    bring: fields.bring ?? [],
    condition: fields.condition ?? null,
    group_by: fields.groupBy ?? null,
    output: fields.output ?? null,
  };
}

export function mkDocument(rule: RuleDoc, editorMeta?: unknown): RuleDocument {
  const doc: RuleDocument = { format_version: FORMAT_VERSION, rule };
  if (editorMeta !== undefined) doc.editor_meta = editorMeta;
  return doc;
}

// Byte-identical to the server's serializer for documents built through
// the mk* helpers. Layout coordinates must stay integers for that to
// hold; see Diagram.addNode.
export function canonicalText(doc: RuleDocument): string {
  return JSON.stringify(doc, null, 2) + "\n";
}
