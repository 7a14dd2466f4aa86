// Reference diagrams used across the suites. Each populate* function
// draws into an existing Diagram so the same graphs can be built inside
// an Editor or standalone.

import { Diagram } from "../src/canvas";

export function populateWithdrawal(d: Diagram): void {
  d.ruleName = "LargeWithdrawals";
  const ev = d.addNode("event_type", { x: 40, y: 60 }, {
    name: "Withdrawal",
    attributes: [{ name: "amount", kind: "float" }],
  });
  const target = d.addNode("target_group", { x: 220, y: 40 }, {
    window: { kind: "timer", seconds: 10 },
  });
  d.addEdge("link_target", ev.id, target.id);
  const bring = d.addNode("bring_group", { x: 220, y: 180 });
  d.addNode("star", { x: 240, y: 200 }, {}, bring.id);
  const condition = d.addNode("condition_group", { x: 420, y: 40 });
  const compare = d.addNode("comparison", { x: 440, y: 60 }, { op: ">=" }, condition.id);
  const amount = d.addNode("attribute_ref", { x: 430, y: 130 }, { attr: "amount" }, condition.id);
  const limit = d.addNode("literal", { x: 510, y: 130 }, { value: 200 }, condition.id);
  d.addEdge("operational", compare.id, amount.id);
  d.addEdge("operational", compare.id, limit.id);
}

export function populateAvg(d: Diagram): void {
  d.ruleName = "RollingAvgPrice";
  const ev = d.addNode("event_type", { x: 40, y: 60 }, {
    name: "stockTickEvent",
    attributes: [{ name: "price", kind: "float" }],
  });
  const target = d.addNode("target_group", { x: 220, y: 40 }, {
    window: { kind: "timer", seconds: 30 },
  });
  d.addEdge("link_target", ev.id, target.id);
  const bring = d.addNode("bring_group", { x: 220, y: 180 });
  const mean = d.addNode("aggregation", { x: 240, y: 200 }, { fn: "avg" }, bring.id);
  const price = d.addNode("attribute_ref", { x: 320, y: 200 }, { attr: "price" }, bring.id);
  d.addEdge("operational", mean.id, price.id);
}

export function populateSequence(d: Diagram): void {
  d.ruleName = "Sequence";
  const a = d.addNode("event_type", { x: 40, y: 40 }, {
    name: "A",
    attributes: [{ name: "x", kind: "integer" }],
  });
  const b = d.addNode("event_type", { x: 40, y: 140 }, {
    name: "B",
    attributes: [{ name: "y", kind: "integer" }],
  });
  const targetA = d.addNode("target_group", { x: 220, y: 40 }, { alias: "a" });
  const targetB = d.addNode("target_group", { x: 220, y: 140 }, { alias: "b" });
  d.addEdge("link_target", a.id, targetA.id);
  d.addEdge("link_target", b.id, targetB.id);
  const seq = d.addNode("sequence", { x: 420, y: 90 });
  const first = d.addNode("pattern_event", { x: 520, y: 40 }, { alias: "a" });
  const second = d.addNode("pattern_event", { x: 520, y: 140 }, { alias: "b" });
  d.addEdge("pattern", seq.id, first.id);
  d.addEdge("pattern", seq.id, second.id);
  const within = d.addNode("guard", { x: 420, y: 200 }, { kind: "with_in", seconds: 10 });
  const every = d.addNode("repetition", { x: 420, y: 260 }, { kind: "every" });
  d.addEdge("pattern", seq.id, within.id);
  d.addEdge("pattern", seq.id, every.id);
  const bring = d.addNode("bring_group", { x: 640, y: 90 });
  d.addNode("star", { x: 660, y: 110 }, {}, bring.id);
}

export function populateKeepall(d: Diagram): void {
  d.ruleName = "AllMyEvents";
  const target = d.addNode("target_group", { x: 200, y: 40 }, {
    window: { kind: "keep_all" },
  });
  d.addNode("event_type", { x: 220, y: 60 }, { name: "MyEvent", attributes: [] }, target.id);
  const bring = d.addNode("bring_group", { x: 200, y: 180 });
  d.addNode("star", { x: 220, y: 200 }, {}, bring.id);
}

export function withdrawalDiagram(): Diagram {
  const d = new Diagram();
  populateWithdrawal(d);
  return d;
}

export function avgDiagram(): Diagram {
  const d = new Diagram();
  populateAvg(d);
  return d;
}

export function sequenceDiagram(): Diagram {
  const d = new Diagram();
  populateSequence(d);
  return d;
}

export function keepallDiagram(): Diagram {
  const d = new Diagram();
  populateKeepall(d);
  return d;
}
