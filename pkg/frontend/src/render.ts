// SVG rendering of a graph view. Pure string builder: layout is a
// deterministic grid, hit targets carry data attributes that main.ts
// resolves on pointer events. Keeping this DOM-free makes it testable.

import { GraphView, NodeView } from "./viewmodel.js";

export const NODE_WIDTH = 168;
export const NODE_HEADER = 26;
export const PORT_SPACING = 18;
export const COLUMN_GAP = 70;
export const ROW_GAP = 28;

const KIND_CLASS: Record<string, string> = {
  basic: "node-basic",
  proxy: "node-proxy",
  probe_sink: "node-probe",
  probe_source: "node-probe",
  sequence: "node-sequence",
};

export interface NodeLayout {
  id: string;
  x: number;
  y: number;
  height: number;
}

export interface PortPoint {
  x: number;
  y: number;
}

function nodeHeight(node: NodeView): number {
  const rows = Math.max(node.inputs.length, node.outputs.length, 1);
  return NODE_HEADER + rows * PORT_SPACING + 8;
}

/** Column by role: services enter on the left, probes export on the right. */
function columnOf(node: NodeView): number {
  if (node.kind === "proxy") return 0;
  if (node.kind === "probe_sink" || node.kind === "probe_source") return 2;
  return 1;
}

export function layoutNodes(view: GraphView): Map<string, NodeLayout> {
  const columns: NodeView[][] = [[], [], []];
  for (const node of view.nodes) columns[columnOf(node)].push(node);
  const layout = new Map<string, NodeLayout>();
  columns.forEach((nodes, column) => {
    let y = 20;
    for (const node of nodes) {
      const height = nodeHeight(node);
      layout.set(node.id, {
        id: node.id,
        x: 20 + column * (NODE_WIDTH + COLUMN_GAP),
        y,
        height,
      });
      y += height + ROW_GAP;
    }
  });
  return layout;
}

export function portPoint(layout: NodeLayout, node: NodeView,
                          portId: string, direction: "input" | "output",
                          ): PortPoint | null {
  const ports = direction === "input" ? node.inputs : node.outputs;
  const index = ports.findIndex((p) => p.portId === portId);
  if (index < 0) return null;
  return {
    x: layout.x + (direction === "input" ? 0 : NODE_WIDTH),
    y: layout.y + NODE_HEADER + index * PORT_SPACING + PORT_SPACING / 2,
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;")
    .replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function renderNode(node: NodeView, layout: NodeLayout,
                    selected: boolean): string {
  const parts: string[] = [];
  const cls = [
    "node", KIND_CLASS[node.kind] ?? "node-basic",
    selected ? "selected" : "",
    node.frozen ? "frozen" : "",
  ].filter(Boolean).join(" ");
  parts.push(
    `<g class="${cls}" data-node="${esc(node.id)}" ` +
    `transform="translate(${layout.x},${layout.y})">`);
  parts.push(
    `<rect class="node-box" width="${NODE_WIDTH}" height="${layout.height}"` +
    ` rx="6" data-node="${esc(node.id)}"></rect>`);
  parts.push(
    `<text class="node-title" x="${NODE_WIDTH / 2}" y="16" ` +
    `text-anchor="middle" data-node="${esc(node.id)}">${esc(node.id)}</text>`);
  if (node.frozen) {
    parts.push(`<text class="badge badge-frozen" x="${NODE_WIDTH - 6}" y="16" ` +
      `text-anchor="end">frozen</text>`);
  }
  if (node.activity > 0) {
    parts.push(`<text class="badge badge-activity" x="6" y="16">` +
      `${node.activity}</text>`);
  }
  node.inputs.forEach((port, index) => {
    const y = NODE_HEADER + index * PORT_SPACING + PORT_SPACING / 2;
    parts.push(
      `<circle class="port port-in" cx="0" cy="${y}" r="5" ` +
      `data-node="${esc(node.id)}" data-port="${esc(port.portId)}" ` +
      `data-direction="input"></circle>`);
    parts.push(`<text class="port-label" x="9" y="${y + 3}">` +
      `${esc(port.portId)}</text>`);
  });
  node.outputs.forEach((port, index) => {
    const y = NODE_HEADER + index * PORT_SPACING + PORT_SPACING / 2;
    parts.push(
      `<circle class="port port-out" cx="${NODE_WIDTH}" cy="${y}" r="5" ` +
      `data-node="${esc(node.id)}" data-port="${esc(port.portId)}" ` +
      `data-direction="output"></circle>`);
    parts.push(`<text class="port-label" x="${NODE_WIDTH - 9}" y="${y + 3}" ` +
      `text-anchor="end">${esc(port.portId)}</text>`);
  });
  parts.push("</g>");
  return parts.join("");
}

export function renderSvg(view: GraphView): string {
  const layout = layoutNodes(view);
  const nodesById = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [];
  let maxX = 640;
  let maxY = 360;
  for (const cell of layout.values()) {
    maxX = Math.max(maxX, cell.x + NODE_WIDTH + 40);
    maxY = Math.max(maxY, cell.y + cell.height + 40);
  }
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" class="graph" ` +
    `width="${maxX}" height="${maxY}">`);
  for (const edge of view.edges) {
    const sourceNode = nodesById.get(edge.source.instance_id);
    const sourceLayout = layout.get(edge.source.instance_id);
    if (!sourceNode || !sourceLayout) continue;
    const from = portPoint(sourceLayout, sourceNode, edge.source.port_id,
                           "output");
    if (!from) continue;
    for (const target of edge.targets) {
      const targetNode = nodesById.get(target.instance_id);
      const targetLayout = layout.get(target.instance_id);
      if (!targetNode || !targetLayout) continue;
      const to = portPoint(targetLayout, targetNode, target.port_id, "input");
      if (!to) continue;
      const mid = (from.x + to.x) / 2;
      const selected = view.selection?.kind === "edge" &&
        view.selection.id === edge.id;
      parts.push(
        `<path class="edge${selected ? " selected" : ""}" ` +
        `data-edge="${esc(edge.id)}" d="M ${from.x} ${from.y} ` +
        `C ${mid} ${from.y}, ${mid} ${to.y}, ${to.x} ${to.y}"></path>`);
    }
  }
  for (const node of view.nodes) {
    const cell = layout.get(node.id);
    if (!cell) continue;
    const selected = view.selection?.kind === "node" &&
      view.selection.id === node.id;
    parts.push(renderNode(node, cell, selected));
  }
  parts.push("</svg>");
  return parts.join("");
}
