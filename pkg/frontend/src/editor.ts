// DOM composition: constructors palette on the left, draw area in the
// middle, properties/export tabs on the right. The palette is rendered
// strictly from the registry so the section order and the one-item-per-
// construct rule hold at the DOM level, not just in data.

import { ApiClient, Diagnostic } from "./api";
import { Diagram, CanvasNode } from "./canvas";
import { FILE_SUFFIX, canonicalText } from "./document";
import { toDocument, toModel } from "./lower";
import { ConstructId, PALETTE, paletteItem } from "./palette";

export class Editor {
  readonly diagram = new Diagram();
  readonly root: HTMLElement;

  private readonly drawArea: HTMLElement;
  private readonly exportSource: HTMLElement;
  private readonly diagnosticsList: HTMLElement;
  private readonly propsView: HTMLElement;
  private readonly banner: HTMLElement;
  private selected: number | null = null;

  constructor(host: HTMLElement, private readonly api: ApiClient) {
    const doc = host.ownerDocument;
    this.root = doc.createElement("div");
    this.root.className = "cep-editor";

    const palette = doc.createElement("aside");
    palette.className = "palette";
    for (const section of PALETTE) {
      const el = doc.createElement("section");
      el.className = "palette-section";
      el.dataset.section = section.name;
      const heading = doc.createElement("h3");
      heading.textContent = section.name;
      el.appendChild(heading);
      const items = doc.createElement("div");
      items.className = "palette-items";
      for (const item of section.items) {
        const button = doc.createElement("button");
        button.className = `palette-item glyph-${item.glyph.shape}`;
        button.dataset.construct = item.construct;
        button.textContent = item.glyph.label;
        items.appendChild(button);
      }
      el.appendChild(items);
      palette.appendChild(el);
    }
    this.root.appendChild(palette);

    this.drawArea = doc.createElement("main");
    this.drawArea.className = "draw-area";
    this.root.appendChild(this.drawArea);

    const side = doc.createElement("div");
    side.className = "side";
    const tabs = doc.createElement("nav");
    tabs.className = "tab-bar";
    for (const name of ["properties", "export"]) {
      const button = doc.createElement("button");
      button.dataset.tab = name;
      button.textContent = name === "properties" ? "Properties" : "Export";
      button.addEventListener("click", () => this.showTab(name));
      tabs.appendChild(button);
    }
    side.appendChild(tabs);

    const properties = doc.createElement("section");
    properties.className = "tab-panel";
    properties.dataset.panel = "properties";
    this.propsView = doc.createElement("pre");
    this.propsView.className = "props-view";
    properties.appendChild(this.propsView);
    side.appendChild(properties);

    const exportPanel = doc.createElement("section");
    exportPanel.className = "tab-panel";
    exportPanel.dataset.panel = "export";
    exportPanel.hidden = true;
    const exportButton = doc.createElement("button");
    exportButton.className = "export-button";
    exportButton.textContent = "Export";
    exportButton.addEventListener("click", () => void this.exportRule());
    exportPanel.appendChild(exportButton);
    this.exportSource = doc.createElement("pre");
    this.exportSource.className = "export-source";
    exportPanel.appendChild(this.exportSource);
    this.diagnosticsList = doc.createElement("ul");
    this.diagnosticsList.className = "diagnostics";
    exportPanel.appendChild(this.diagnosticsList);
    side.appendChild(exportPanel);
    this.root.appendChild(side);

    this.banner = doc.createElement("div");
    this.banner.className = "banner";
    this.banner.hidden = true;
    this.root.appendChild(this.banner);

    host.appendChild(this.root);
  }

  place(construct: ConstructId, x: number, y: number, props: Record<string, unknown> = {},
        parent: number | null = null): CanvasNode {
    const node = this.diagram.addNode(construct, { x, y }, props, parent);
    this.refresh();
    return node;
  }

  connect(kind: "link_target" | "operational" | "pattern", from: number, to: number): void {
    this.diagram.addEdge(kind, from, to);
    this.refresh();
  }

  select(id: number): void {
    this.selected = id;
    const node = this.diagram.node(id);
    this.propsView.textContent = JSON.stringify(
      { construct: node.construct, props: node.props }, null, 2);
  }

  refresh(): void {
    const doc = this.root.ownerDocument;
    this.drawArea.textContent = "";
    const byId = new Map<number, HTMLElement>();
    for (const node of this.diagram.nodes) {
      const glyph = paletteItem(node.construct).glyph;
      const el = doc.createElement("div");
      el.className = `canvas-node shape-${glyph.shape} construct-${node.construct}`;
      el.dataset.nodeId = String(node.id);
      el.style.left = `${node.position.x}px`;
      el.style.top = `${node.position.y}px`;
      const label = doc.createElement("span");
      label.className = "node-label";
      const own = node.props.name ?? node.props.alias ?? node.props.attr ?? node.props.value;
      label.textContent = own === undefined ? glyph.label : `${glyph.label}: ${own}`;
      el.appendChild(label);
      el.addEventListener("click", () => this.select(node.id));
      byId.set(node.id, el);
      const container = node.parent === null ? this.drawArea : byId.get(node.parent);
      (container ?? this.drawArea).appendChild(el);
    }
    const svg = doc.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("class", "edge-layer");
    for (const edge of this.diagram.edges) {
      const from = this.diagram.node(edge.from);
      const to = this.diagram.node(edge.to);
      const line = doc.createElementNS("http://www.w3.org/2000/svg", "line");
      const cls = edge.kind === "link_target" ? "edge edge-link_target dotted" : `edge edge-${edge.kind}`;
      line.setAttribute("class", cls);
      line.setAttribute("x1", String(from.position.x));
      line.setAttribute("y1", String(from.position.y));
      line.setAttribute("x2", String(to.position.x));
      line.setAttribute("y2", String(to.position.y));
      svg.appendChild(line);
    }
    this.drawArea.appendChild(svg);
    if (this.selected !== null) this.select(this.selected);
  }

  showTab(name: string): void {
    for (const panel of Array.from(this.root.querySelectorAll<HTMLElement>(".tab-panel"))) {
      panel.hidden = panel.dataset.panel !== name;
    }
  }

  save(withLayout = false): string {
    return canonicalText(toDocument(this.diagram, withLayout));
  }

  saveFileName(): string {
    return (this.diagram.ruleName || "rule") + FILE_SUFFIX;
  }

  async exportRule(target: "epl" | "drl" = "epl"): Promise<void> {
    this.banner.hidden = true;
    this.clearDiagnostics();
    this.showTab("export");
    let result;
    try {
      result = await this.api.generate(toDocument(this.diagram), target);
    } catch (err) {
      this.banner.textContent = `service unreachable: ${err}`;
      this.banner.hidden = false;
      return;
    }
    if (result.ok) {
      this.exportSource.textContent = result.text;
      return;
    }
    this.exportSource.textContent = "";
    if (result.diagnostics) {
      for (const d of result.diagnostics) this.addDiagnostic(d.path, `${d.code} ${d.path}: ${d.message}`);
    }
    if (result.unsupported) {
      this.addDiagnostic(result.unsupported.path,
                         `unsupported ${result.unsupported.path}: ${result.unsupported.message}`);
    }
  }

  private clearDiagnostics(): void {
    this.diagnosticsList.textContent = "";
    for (const el of Array.from(this.root.querySelectorAll(".has-diagnostic"))) {
      el.classList.remove("has-diagnostic");
    }
  }

  private addDiagnostic(path: string, text: string): void {
    const doc = this.root.ownerDocument;
    const entry = doc.createElement("li");
    entry.dataset.path = path;
    entry.textContent = text;
    this.diagnosticsList.appendChild(entry);
    const anchored = this.anchorFor(path);
    if (anchored !== null) {
      const el = this.drawArea.querySelector(`[data-node-id="${anchored}"]`);
      el?.classList.add("has-diagnostic");
    }
  }

  private anchorFor(path: string): number | null {
    const { anchors } = toModel(this.diagram);
    let best: string | null = null;
    for (const key of anchors.keys()) {
      if (path === key || path.startsWith(key + ".") || path.startsWith(key + "[")) {
        if (best === null || key.length > best.length) best = key;
      }
    }
    return best === null ? null : anchors.get(best)!;
  }

  renderDiagnostics(diagnostics: Diagnostic[]): void {
    this.clearDiagnostics();
    for (const d of diagnostics) this.addDiagnostic(d.path, `${d.code} ${d.path}: ${d.message}`);
  }
}
