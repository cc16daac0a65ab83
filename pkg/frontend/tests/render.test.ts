import { describe, expect, it } from "vitest";

import { layoutNodes, portPoint, renderSvg } from "../src/render.js";
import { projectAssembly } from "../src/viewmodel.js";
import { MockGateway } from "./helpers.js";

function view(selection: Parameters<typeof projectAssembly>[2]["selection"] = null,
              frozen: string[] = []) {
  const mock = new MockGateway();
  mock.addType("threshold");
  mock.addType("recorder_bool");
  mock.addType("proxy:light-1");
  mock.addInstance("threshold", "t1", {});
  mock.addInstance("recorder_bool", "r1", {});
  mock.addInstance("proxy:light-1", "p1", {});
  mock.addBinding("t1.out", ["r1.in"]);
  return projectAssembly("room1", mock.assemblyDoc(), {
    frozenServiceUids: new Set(frozen),
    activity: new Map(),
    selection,
    error: null,
    publicationMode: "immediate",
    functional: [],
  });
}

describe("renderSvg", () => {
  it("draws one group per node and one path per binding target", () => {
    const svg = renderSvg(view());
    expect(svg.match(/data-node="t1"/g)!.length).toBeGreaterThan(0);
    expect(svg.match(/class="node /g)!.length).toBe(3);
    expect(svg.match(/<path class="edge"/g)!.length).toBe(1);
  });

  it("styles nodes by kind and marks selection", () => {
    const svg = renderSvg(view({ kind: "node", id: "p1" }));
    expect(svg).toContain("node-proxy");
    expect(svg).toContain("selected");
  });

  it("shows the frozen badge", () => {
    const svg = renderSvg(view(null, ["light-1"]));
    expect(svg).toContain("badge-frozen");
    expect(svg).toContain("frozen");
  });

  it("escapes markup in identifiers", () => {
    const v = view();
    v.nodes[0].id = '<script>"x"';
    const svg = renderSvg(v);
    expect(svg).not.toContain("<script>");
    expect(svg).toContain("&lt;script&gt;");
  });
});

describe("layout", () => {
  it("assigns proxies, basics and probes to separate columns", () => {
    const v = view();
    const layout = layoutNodes(v);
    const xs = new Set([...layout.values()].map((cell) => cell.x));
    expect(xs.size).toBe(2); // proxy column + basic column here
    const proxyX = layout.get("p1")!.x;
    const basicX = layout.get("t1")!.x;
    expect(proxyX).toBeLessThan(basicX);
  });

  it("port lookup lands on the node edge", () => {
    const v = view();
    const layout = layoutNodes(v);
    const node = v.nodes.find((n) => n.id === "t1")!;
    const input = portPoint(layout.get("t1")!, node, "in", "input")!;
    const output = portPoint(layout.get("t1")!, node, "out", "output")!;
    expect(input.x).toBe(layout.get("t1")!.x);
    expect(output.x).toBe(layout.get("t1")!.x + 168);
    expect(portPoint(layout.get("t1")!, node, "nope", "input")).toBeNull();
  });
});
