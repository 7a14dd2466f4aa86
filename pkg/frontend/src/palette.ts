// The constructors palette: six fixed sections, one item per language
// construct, one glyph per item. Section order is part of the contract
// and is asserted in the tests, as is the construct-to-glyph bijection.

export type SectionName =
  | "Objects"
  | "Ensembles"
  | "Target Connector"
  | "Operational Components"
  | "Operational Connectors"
  | "Pattern Components";

export type ConstructId =
  | "event_type"
  | "target_group"
  | "bring_group"
  | "condition_group"
  | "groupby_group"
  | "link_target"
  | "attribute_ref"
  | "literal"
  | "star"
  | "aggregation"
  | "scalar_function"
  | "comparison"
  | "arithmetic"
  | "logical"
  | "pattern_event"
  | "sequence"
  | "conjunction"
  | "disjunction"
  | "negation"
  | "guard"
  | "repetition";

export type GlyphShape =
  | "rounded"
  | "rectangle"
  | "dashed-rectangle"
  | "dotted-line"
  | "ellipse"
  | "diamond"
  | "hexagon"
  | "circle"
  | "tag";

export interface Glyph {
  shape: GlyphShape;
  label: string;
}

export interface PaletteItem {
  construct: ConstructId;
  glyph: Glyph;
}

export interface PaletteSection {
  name: SectionName;
  items: PaletteItem[];
}

function item(construct: ConstructId, shape: GlyphShape, label: string): PaletteItem {
  return { construct, glyph: { shape, label } };
}

// Rectangles for groups, rounded boxes for events, diamonds for
// operators, circles for values; the one connector renders dotted.
export const PALETTE: readonly PaletteSection[] = Object.freeze([
  {
    name: "Objects",
    items: [item("event_type", "rounded", "Event")],
  },
  {
    name: "Ensembles",
    items: [
      item("target_group", "rectangle", "Target"),
      item("bring_group", "rectangle", "Bring"),
      item("condition_group", "rectangle", "Condition"),
      item("groupby_group", "rectangle", "Group By"),
    ],
  },
  {
    name: "Target Connector",
    items: [item("link_target", "dotted-line", "Link Target")],
  },
  {
    name: "Operational Components",
    items: [
      item("attribute_ref", "circle", "Attribute"),
      item("literal", "circle", "Value"),
      item("star", "circle", "All Columns"),
      item("aggregation", "ellipse", "Aggregate"),
      item("scalar_function", "ellipse", "Function"),
    ],
  },
  {
    name: "Operational Connectors",
    items: [
      item("comparison", "diamond", "Compare"),
      item("arithmetic", "diamond", "Arithmetic"),
      item("logical", "diamond", "And/Or/Not"),
    ],
  },
  {
    name: "Pattern Components",
    items: [
      item("pattern_event", "rounded", "Pattern Event"),
      item("sequence", "hexagon", "Followed By"),
      item("conjunction", "hexagon", "Every Of"),
      item("disjunction", "hexagon", "One Of"),
      item("negation", "hexagon", "Absence"),
      item("guard", "tag", "Within"),
      item("repetition", "tag", "Repeat"),
    ],
  },
]);

const BY_CONSTRUCT = new Map<ConstructId, { section: SectionName; item: PaletteItem }>();
for (const section of PALETTE) {
  for (const it of section.items) {
    BY_CONSTRUCT.set(it.construct, { section: section.name, item: it });
  }
}

export function paletteItem(construct: ConstructId): PaletteItem {
  const found = BY_CONSTRUCT.get(construct);
  if (!found) throw new Error(`no palette item for ${construct}`);
  return found.item;
}

export function sectionOf(construct: ConstructId): SectionName {
  const found = BY_CONSTRUCT.get(construct);
  if (!found) throw new Error(`no palette item for ${construct}`);
  return found.section;
}

export const GROUP_CONSTRUCTS: readonly ConstructId[] = Object.freeze([
  "target_group",
  "bring_group",
  "condition_group",
  "groupby_group",
]);

export const OPERAND_CONSTRUCTS: readonly ConstructId[] = Object.freeze([
  "attribute_ref",
  "literal",
  "star",
  "aggregation",
  "scalar_function",
]);

export const OPERATOR_CONSTRUCTS: readonly ConstructId[] = Object.freeze([
  "comparison",
  "arithmetic",
  "logical",
]);

export const PATTERN_OPERATOR_CONSTRUCTS: readonly ConstructId[] = Object.freeze([
  "pattern_event",
  "sequence",
  "conjunction",
  "disjunction",
  "negation",
]);
