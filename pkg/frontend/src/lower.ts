// Lowering: canvas graph -> rule document. Total and deterministic; an
// incomplete diagram still lowers to a well-formed document and the
// server's validator reports what is missing. Where a slot demands an
// operand but the drawing supplies something else, a zero literal is
// substituted so the document stays parseable.

import { CanvasNode, Diagram, Position } from "./canvas";
import {
  AggFnName,
  ArithOpName,
  AttrDoc,
  AttributeDoc,
  AttributeKind,
  CompareOpName,
  ExprDoc,
  GuardDoc,
  LiteralValue,
  LogicalOpName,
  OperandDoc,
  PatternDoc,
  RepetitionDoc,
  RuleDoc,
  RuleDocument,
  ScalarFnName,
  SelectItemDoc,
  TargetDoc,
  WindowDoc,
  mkAgg,
  mkArith,
  mkAttr,
  mkCall,
  mkCombinator,
  mkCompare,
  mkDocument,
  mkEventNode,
  mkEventType,
  mkGuard,
  mkLit,
  mkLogical,
  mkNotNode,
  mkRule,
  mkSelectItem,
  mkTarget,
  mkWindow,
} from "./document";
import {
  OPERAND_CONSTRUCTS,
  OPERATOR_CONSTRUCTS,
  PATTERN_OPERATOR_CONSTRUCTS,
} from "./palette";

export interface Lowered {
  rule: RuleDoc;
  layout: Record<string, Position>;
  anchors: Map<string, number>;
}

const ATTRIBUTE_KINDS: readonly string[] = ["integer", "float", "string", "boolean", "timestamp"];
const AGG_FNS: readonly string[] = ["avg", "sum", "max", "min", "count"];
const SCALAR_FNS: readonly string[] = ["max2", "min2"];
const COMPARE_OPS: readonly string[] = ["=", "!=", "<", "<=", ">", ">="];
const LOGICAL_OPS: readonly string[] = ["and", "or", "not"];
const ARITH_OPS: readonly string[] = ["+", "-", "*", "/"];

function str(value: unknown, fallback = ""): string {
  return typeof value === "string" ? value : fallback;
}

function strOrNull(value: unknown): string | null {
  return typeof value === "string" ? value : null;
}

function num(value: unknown, fallback = 0): number {
  return typeof value === "number" && Number.isFinite(value) ? value : fallback;
}

function intOrNull(value: unknown): number | null {
  return typeof value === "number" && Number.isInteger(value) ? value : null;
}

function pick<T extends string>(value: unknown, allowed: readonly string[], fallback: T): T {
  return typeof value === "string" && allowed.includes(value) ? (value as T) : fallback;
}

function literalValue(value: unknown): LiteralValue {
  if (typeof value === "string" || typeof value === "boolean") return value;
  if (typeof value === "number" && Number.isFinite(value)) return value;
  return 0;
}

function attributeList(value: unknown): AttributeDoc[] {
  if (!Array.isArray(value)) return [];
  return value.map((entry) => {
    const row = (entry ?? {}) as Record<string, unknown>;
    return {
      name: str(row.name),
      kind: pick<AttributeKind>(row.kind, ATTRIBUTE_KINDS, "string"),
    };
  });
}

function windowOf(value: unknown): WindowDoc | null {
  if (typeof value !== "object" || value === null) return null;
  const raw = value as Record<string, unknown>;
  if (raw.kind === "timer") return mkWindow("timer", num(raw.seconds));
  if (raw.kind === "counter") return mkWindow("counter", num(raw.count));
  if (raw.kind === "keep_all") return mkWindow("keep_all");
  return null;
}

function groupWinOf(value: unknown): string[] | null {
  if (!Array.isArray(value)) return null;
  return value.map((k) => str(k));
}

class Lowering {
  constructor(private readonly diagram: Diagram) {}

  readonly anchors = new Map<string, number>();

  run(): Lowered {
    const d = this.diagram;
    const events = d.byConstruct("event_type").map((node, i) => {
      this.anchors.set(`events[${i}]`, node.id);
      return mkEventType(str(node.props.name), attributeList(node.props.attributes));
    });
    const targets = d.byConstruct("target_group").map((node, i) => {
      this.anchors.set(`targets[${i}]`, node.id);
      return this.target(node);
    });

    const bringGroup = d.byConstruct("bring_group")[0];
    const bring = bringGroup ? this.bringItems(bringGroup) : [];

    const conditionGroup = d.byConstruct("condition_group")[0];
    let condition: ExprDoc | null = null;
    if (conditionGroup) {
      this.anchors.set("condition", conditionGroup.id);
      const roots = this.expressionRoots(conditionGroup);
      if (roots.length > 0) condition = this.booleanExpr(roots[0]);
    }

    const groupByGroup = d.byConstruct("groupby_group")[0];
    let groupBy: { keys: AttrDoc[] } | null = null;
    if (groupByGroup) {
      this.anchors.set("group_by", groupByGroup.id);
      const keys: AttrDoc[] = [];
      for (const root of this.expressionRoots(groupByGroup)) {
        const lowered = this.operand(root);
        if (lowered !== "*" && lowered.kind === "attr") keys.push(lowered);
      }
      groupBy = { keys };
    }

    const pattern = this.pattern();

    const rule = mkRule({
      name: d.ruleName,
      events,
      targets,
      pattern,
      bring,
      condition,
      groupBy,
      output: d.outputName === null ? null : { name: d.outputName },
    });

    const layout: Record<string, Position> = {};
    for (const node of d.nodes) {
      layout[String(node.id)] = { x: node.position.x, y: node.position.y };
    }
    return { rule, layout, anchors: this.anchors };
  }

  // -- targets --------------------------------------------------------------

  private target(node: CanvasNode): TargetDoc {
    const d = this.diagram;
    let eventName = "";
    const link = d.edgesTo(node.id, "link_target")[0];
    if (link) {
      eventName = str(d.node(link.from).props.name);
    } else {
      const contained = d.children(node.id).find((c) => c.construct === "event_type");
      if (contained) eventName = str(contained.props.name);
    }
    return mkTarget(
      eventName,
      strOrNull(node.props.alias),
      windowOf(node.props.window),
      groupWinOf(node.props.groupWin),
    );
  }

  // -- expressions ----------------------------------------------------------

  private isValueNode(node: CanvasNode): boolean {
    return (
      OPERAND_CONSTRUCTS.includes(node.construct) ||
      OPERATOR_CONSTRUCTS.includes(node.construct)
    );
  }

  private expressionRoots(group: CanvasNode): CanvasNode[] {
    const members = this.diagram.children(group.id).filter((n) => this.isValueNode(n));
    const ids = new Set(members.map((m) => m.id));
    return members.filter(
      (m) => !this.diagram.edgesTo(m.id, "operational").some((e) => ids.has(e.from)),
    );
  }

  private valueChildren(node: CanvasNode): CanvasNode[] {
    return this.diagram
      .edgesFrom(node.id, "operational")
      .map((e) => this.diagram.node(e.to))
      .filter((n) => this.isValueNode(n));
  }

  private operand(node: CanvasNode): OperandDoc | "*" {
    switch (node.construct) {
      case "star":
        return "*";
      case "attribute_ref":
        return mkAttr(strOrNull(node.props.alias), str(node.props.attr));
      case "literal":
        return mkLit(literalValue(node.props.value));
      case "aggregation": {
        const fn = pick<AggFnName>(node.props.fn, AGG_FNS, "count");
        let of: AttrDoc | null = null;
        for (const child of this.valueChildren(node)) {
          const lowered = this.operand(child);
          if (lowered !== "*" && lowered.kind === "attr") {
            of = lowered;
            break;
          }
        }
        return mkAgg(fn, of);
      }
      case "scalar_function": {
        const fn = pick<ScalarFnName>(node.props.fn, SCALAR_FNS, "max2");
        const args = this.valueChildren(node).map((c) => this.strictOperand(c));
        while (args.length < 2) args.push(mkLit(0));
        return mkCall(fn, args.slice(0, 2));
      }
      case "arithmetic": {
        const op = pick<ArithOpName>(node.props.op, ARITH_OPS, "+");
        const children = this.valueChildren(node);
        return mkArith(op, this.childOperand(children, 0), this.childOperand(children, 1));
      }
      case "comparison":
      case "logical":
        return mkLit(0);
      default:
        return mkLit(0);
    }
  }

  private strictOperand(node: CanvasNode): OperandDoc {
    const lowered = this.operand(node);
    return lowered === "*" ? mkLit(0) : lowered;
  }

  private childOperand(children: CanvasNode[], index: number): OperandDoc {
    return index < children.length ? this.strictOperand(children[index]) : mkLit(0);
  }

  private booleanExpr(node: CanvasNode): ExprDoc {
    if (node.construct === "comparison") {
      const op = pick<CompareOpName>(node.props.op, COMPARE_OPS, "=");
      const children = this.valueChildren(node);
      return mkCompare(op, this.childOperand(children, 0), this.childOperand(children, 1));
    }
    if (node.construct === "logical") {
      const op = pick<LogicalOpName>(node.props.op, LOGICAL_OPS, "and");
      return mkLogical(op, this.valueChildren(node).map((c) => this.booleanExpr(c)));
    }
    return this.strictOperand(node);
  }

  // -- bring ---------------------------------------------------------------

  private bringItems(group: CanvasNode): SelectItemDoc[] {
    return this.expressionRoots(group).map((root, i) => {
      this.anchors.set(`bring[${i}]`, root.id);
      return mkSelectItem(this.operand(root), strOrNull(root.props.as));
    });
  }

  // -- pattern --------------------------------------------------------------

  private pattern(): PatternDoc | null {
    const operators = this.diagram.byConstruct(...PATTERN_OPERATOR_CONSTRUCTS);
    const ids = new Set(operators.map((n) => n.id));
    const roots = operators.filter(
      (n) => !this.diagram.edgesTo(n.id, "pattern").some((e) => ids.has(e.from)),
    );
    if (roots.length === 0) return null;
    this.anchors.set("pattern", roots[0].id);
    return this.patternNode(roots[0]);
  }

  private patternChildren(node: CanvasNode): CanvasNode[] {
    return this.diagram
      .edgesFrom(node.id, "pattern")
      .map((e) => this.diagram.node(e.to))
      .filter((n) => PATTERN_OPERATOR_CONSTRUCTS.includes(n.construct));
  }

  private attachment(node: CanvasNode, construct: "guard" | "repetition"): CanvasNode | null {
    for (const edge of this.diagram.edgesFrom(node.id, "pattern")) {
      const tail = this.diagram.node(edge.to);
      if (tail.construct === construct) return tail;
    }
    return null;
  }

  private guardOf(node: CanvasNode): GuardDoc | null {
    const attached = this.attachment(node, "guard");
    if (!attached) return null;
    const kind = attached.props.kind === "with_in_max" ? "with_in_max" : "with_in";
    return mkGuard(kind, num(attached.props.seconds), num(attached.props.maxInstances));
  }

  private repetitionOf(node: CanvasNode): RepetitionDoc | null {
    const attached = this.attachment(node, "repetition");
    if (!attached) return null;
    const kind = pick<RepetitionDoc["kind"]>(
      attached.props.kind,
      ["every", "every_distinct", "range", "while", "until"],
      "every",
    );
    if (kind === "every_distinct") {
      const keys = Array.isArray(attached.props.keys)
        ? attached.props.keys.map((k) => {
            const row = (k ?? {}) as Record<string, unknown>;
            return mkAttr(strOrNull(row.alias), str(row.attr));
          })
        : [];
      return { kind, keys };
    }
    if (kind === "range") {
      return { kind, low: intOrNull(attached.props.low), high: intOrNull(attached.props.high) };
    }
    if (kind === "while") {
      return { kind, condition: mkLit(true) };
    }
    if (kind === "until") {
      return { kind, until: mkEventNode("") };
    }
    return { kind };
  }

  private patternNode(node: CanvasNode): PatternDoc {
    const guard = this.guardOf(node);
    const repetition = this.repetitionOf(node);
    if (node.construct === "pattern_event") {
      const filterNode = this.valueChildren(node)[0];
      return mkEventNode(
        str(node.props.alias),
        filterNode ? this.booleanExpr(filterNode) : null,
        strOrNull(node.props.tag),
        guard,
        repetition,
      );
    }
    if (node.construct === "negation") {
      const child = this.patternChildren(node)[0];
      return mkNotNode(child ? this.patternNode(child) : mkEventNode(""), guard, repetition);
    }
    const tag =
      node.construct === "sequence" ? "seq" : node.construct === "conjunction" ? "and" : "or";
    return mkCombinator(
      tag,
      this.patternChildren(node).map((c) => this.patternNode(c)),
      guard,
      repetition,
    );
  }
}

export function toModel(diagram: Diagram): Lowered {
  return new Lowering(diagram).run();
}

export function toDocument(diagram: Diagram, withLayout = false): RuleDocument {
  const lowered = toModel(diagram);
  return mkDocument(lowered.rule, withLayout ? { positions: lowered.layout } : undefined);
}
