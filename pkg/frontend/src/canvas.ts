// The draw area's data model: nodes, edges, containment. Structural
// rules that would make a diagram meaningless (a link-target edge into
// something that is not a Target, containment in a non-group) are
// refused here; everything semantic is left to the server's validator
// so drawing is never blocked mid-thought.

import { ConstructId, GROUP_CONSTRUCTS } from "./palette";

export type EdgeKind = "link_target" | "operational" | "pattern";

export interface Position {
  x: number;
  y: number;
}

export interface CanvasNode {
  id: number;
  construct: ConstructId;
  position: Position;
  props: Record<string, unknown>;
  parent: number | null;
}

export interface CanvasEdge {
  id: number;
  kind: EdgeKind;
  from: number;
  to: number;
}

export class Diagram {
  ruleName = "";
  outputName: string | null = null;

  readonly nodes: CanvasNode[] = [];
  readonly edges: CanvasEdge[] = [];
  private nextId = 1;

  node(id: number): CanvasNode {
    const found = this.nodes.find((n) => n.id === id);
    if (!found) throw new Error(`no node ${id}`);
    return found;
  }

  addNode(
    construct: ConstructId,
    position: Position,
    props: Record<string, unknown> = {},
    parent: number | null = null,
  ): CanvasNode {
    if (parent !== null) {
      const container = this.node(parent);
      if (!GROUP_CONSTRUCTS.includes(container.construct)) {
        throw new Error(`${container.construct} is not a container`);
      }
      if (construct === "target_group" && container.construct !== "target_group") {
        throw new Error("a Target may nest only inside another Target");
      }
    }
    const node: CanvasNode = {
      id: this.nextId++,
      construct,
      // integer coordinates keep saved layouts byte-stable
      position: { x: Math.round(position.x), y: Math.round(position.y) },
      props,
      parent,
    };
    this.nodes.push(node);
    return node;
  }

  addEdge(kind: EdgeKind, from: number, to: number): CanvasEdge {
    const head = this.node(from);
    const tail = this.node(to);
    if (kind === "link_target") {
      if (tail.construct !== "target_group") {
        throw new Error("link-target edges connect only to Target groups");
      }
      if (head.construct !== "event_type") {
        throw new Error("link-target edges start at an Event object");
      }
    }
    const edge: CanvasEdge = { id: this.nextId++, kind, from, to };
    this.edges.push(edge);
    return edge;
  }

  moveNode(id: number, position: Position): void {
    const node = this.node(id);
    node.position = { x: Math.round(position.x), y: Math.round(position.y) };
  }

  setProps(id: number, props: Record<string, unknown>): void {
    const node = this.node(id);
    node.props = { ...node.props, ...props };
  }

  children(parent: number): CanvasNode[] {
    return this.nodes.filter((n) => n.parent === parent);
  }

  byConstruct(...constructs: ConstructId[]): CanvasNode[] {
    return this.nodes.filter((n) => constructs.includes(n.construct));
  }

  edgesFrom(from: number, kind?: EdgeKind): CanvasEdge[] {
    return this.edges.filter(
      (e) => e.from === from && (kind === undefined || e.kind === kind),
    );
  }

  edgesTo(to: number, kind?: EdgeKind): CanvasEdge[] {
    return this.edges.filter(
      (e) => e.to === to && (kind === undefined || e.kind === kind),
    );
  }
}
