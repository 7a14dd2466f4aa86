import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import { beforeEach, expect, test } from "vitest";

import { ApiClient, FetchLike } from "../src/api";
import { Editor } from "../src/editor";
import { PALETTE } from "../src/palette";
import { populateSequence, populateWithdrawal } from "./diagrams";

function fakeFetch(handler: (url: string, body: unknown) => { status: number; data: unknown }): FetchLike {
  return async (url, init) => {
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const { status, data } = handler(url, body);
    return { status, json: async () => data } as unknown as Response;
  };
}

function makeEditor(fetchImpl?: FetchLike): Editor {
  document.body.innerHTML = "";
  const api = new ApiClient("http://cep.test", fetchImpl ?? fakeFetch(() => ({ status: 500, data: {} })));
  return new Editor(document.body, api);
}

beforeEach(() => {
  document.body.innerHTML = "";
});

test("palette renders six sections in order with one button per construct", () => {
  makeEditor();
  const headings = Array.from(document.querySelectorAll(".palette-section h3")).map(
    (h) => h.textContent,
  );
  expect(headings).toEqual(PALETTE.map((s) => s.name));
  const buttons = Array.from(document.querySelectorAll(".palette-item"));
  const constructs = buttons.map((b) => (b as HTMLElement).dataset.construct);
  expect(constructs.length).toBe(PALETTE.flatMap((s) => s.items).length);
  expect(new Set(constructs).size).toBe(constructs.length);
});

test("link-target edges render dotted and containment nests in the DOM", () => {
  const editor = makeEditor();
  const ev = editor.place("event_type", 20, 20, { name: "Withdrawal", attributes: [] });
  const target = editor.place("target_group", 200, 20, {});
  editor.connect("link_target", ev.id, target.id);
  editor.place("event_type", 210, 40, { name: "Inner", attributes: [] }, target.id);

  const line = document.querySelector(".edge-layer line");
  expect(line?.getAttribute("class")).toContain("dotted");
  const targetEl = document.querySelector(`[data-node-id="${target.id}"]`);
  expect(targetEl?.querySelector(".canvas-node")).not.toBeNull();
});

test("tab bar switches between properties and export", () => {
  const editor = makeEditor();
  const panels = () =>
    Array.from(document.querySelectorAll<HTMLElement>(".tab-panel")).map(
      (p) => [p.dataset.panel, p.hidden] as const,
    );
  expect(panels()).toEqual([
    ["properties", false],
    ["export", true],
  ]);
  editor.showTab("export");
  expect(panels()).toEqual([
    ["properties", true],
    ["export", false],
  ]);
});

test("selecting a node shows its properties", () => {
  const editor = makeEditor();
  const node = editor.place("attribute_ref", 10, 10, { attr: "amount" });
  editor.select(node.id);
  expect(document.querySelector(".props-view")?.textContent).toContain('"attr": "amount"');
});

test("export success fills the export tab with the generated source", async () => {
  const editor = makeEditor(
    fakeFetch((url) => {
      expect(url).toBe("http://cep.test/api/generate?target=epl");
      return { status: 200, data: { target: "epl", text: "select * from X" } };
    }),
  );
  populateWithdrawal(editor.diagram);
  await editor.exportRule();
  expect(document.querySelector(".export-source")?.textContent).toBe("select * from X");
  expect(document.querySelectorAll(".diagnostics li").length).toBe(0);
});

test("diagnostics render in the panel and no source is shown", async () => {
  const editor = makeEditor(
    fakeFetch(() => ({
      status: 422,
      data: {
        diagnostics: [
          { code: "V001", severity: "error", path: "targets", message: "a rule needs at least one target event" },
        ],
      },
    })),
  );
  await editor.exportRule();
  const entries = Array.from(document.querySelectorAll(".diagnostics li"));
  expect(entries.length).toBe(1);
  expect(entries[0].textContent).toContain("V001");
  expect(document.querySelector(".export-source")?.textContent).toBe("");
});

test("unsupported-construct replies anchor to the offending node", async () => {
  const editor = makeEditor(
    fakeFetch(() => ({
      status: 422,
      data: { unsupported: { path: "pattern", message: "patterns are not part of the DRL subset" } },
    })),
  );
  populateSequence(editor.diagram);
  editor.refresh();
  await editor.exportRule("drl");
  const flagged = document.querySelector(".has-diagnostic");
  expect(flagged).not.toBeNull();
  expect(flagged?.className).toContain("construct-sequence");
});

test("a transport failure raises the banner instead of crashing", async () => {
  const editor = makeEditor(async () => {
    throw new Error("connection refused");
  });
  await editor.exportRule();
  const banner = document.querySelector<HTMLElement>(".banner");
  expect(banner?.hidden).toBe(false);
  expect(banner?.textContent).toContain("connection refused");
});

test("save produces the canonical document bytes", () => {
  const editor = makeEditor();
  populateWithdrawal(editor.diagram);
  const expected = readFileSync(
    resolve(process.cwd(), "tests/fixtures/withdrawal.ceprule.json"),
    "utf8",
  );
  expect(editor.save()).toBe(expected);
  expect(editor.saveFileName()).toBe("LargeWithdrawals.ceprule.json");
  const withLayout = JSON.parse(editor.save(true));
  expect(Object.keys(withLayout.editor_meta.positions).length).toBe(
    editor.diagram.nodes.length,
  );
});
