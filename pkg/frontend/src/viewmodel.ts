// Pure projection of the last assembly document + event-stream state into
// what the canvas draws. No UI-local semantic state lives here: every
// field is derived from server-sent data.

import {
  AssemblyDoc, ComponentKind, EndpointDoc, TypeDoc, ValueKind,
} from "./types.js";

export interface PortView {
  portId: string;
  paramTypes: ValueKind[];
}

export interface NodeView {
  id: string;
  typeId: string;
  kind: ComponentKind;
  inputs: PortView[];
  outputs: PortView[];
  properties: Record<string, unknown>;
  frozen: boolean;
  activity: number;
}

export interface EdgeView {
  id: string;
  source: EndpointDoc;
  targets: EndpointDoc[];
}

export type Selection =
  | { kind: "node"; id: string }
  | { kind: "edge"; id: string }
  | null;

export interface GraphView {
  composite: string;
  nodes: NodeView[];
  edges: EdgeView[];
  selection: Selection;
  error: string | null;
  publicationMode: "immediate" | "batched";
  functional: string[];
}

export interface RuntimeState {
  frozenServiceUids: ReadonlySet<string>;
  activity: ReadonlyMap<string, number>;
  selection: Selection;
  error: string | null;
  publicationMode: "immediate" | "batched";
  functional: string[];
}

/** Service uid a proxy instance is bound to, from its mechanical type id. */
export function proxyServiceUid(typeId: string): string | null {
  return typeId.startsWith("proxy:") ? typeId.slice("proxy:".length) : null;
}

export function projectAssembly(
  composite: string,
  doc: AssemblyDoc | null,
  runtime: RuntimeState,
): GraphView {
  if (doc === null) {
    return {
      composite, nodes: [], edges: [], selection: runtime.selection,
      error: runtime.error, publicationMode: runtime.publicationMode,
      functional: [...runtime.functional],
    };
  }
  const types = new Map<string, TypeDoc>(doc.types.map((t) => [t.type_id, t]));
  const nodes = doc.instances.map((inst) => {
    const type = types.get(inst.type_id);
    const serviceUid = proxyServiceUid(inst.type_id);
    return {
      id: inst.instance_id,
      typeId: inst.type_id,
      kind: type?.kind ?? "basic",
      inputs: (type?.inputs ?? []).map((p) => ({
        portId: p.port_id, paramTypes: [...p.param_types],
      })),
      outputs: (type?.outputs ?? []).map((p) => ({
        portId: p.port_id, paramTypes: [...p.param_types],
      })),
      properties: { ...inst.property_values },
      frozen: serviceUid !== null && runtime.frozenServiceUids.has(serviceUid),
      activity: runtime.activity.get(inst.instance_id) ?? 0,
    };
  });
  const edges = doc.bindings.map((b) => ({
    id: b.binding_id ?? `${b.source.instance_id}.${b.source.port_id}`,
    source: { ...b.source },
    targets: b.targets.map((t) => ({ ...t })),
  }));
  return {
    composite,
    nodes,
    edges,
    selection: runtime.selection,
    error: runtime.error,
    publicationMode: runtime.publicationMode,
    functional: [...runtime.functional],
  };
}

export interface BindCheck {
  ok: boolean;
  reason?: string;
}

/**
 * Client-side mirror of the binding type rule, purely as an affordance
 * (the control service remains the authority): the source must be an
 * output port, the target an input port, and the parameter signatures
 * must be identical.
 */
export function canBind(doc: AssemblyDoc, source: EndpointDoc,
                        target: EndpointDoc): BindCheck {
  const types = new Map(doc.types.map((t) => [t.type_id, t]));
  const instances = new Map(doc.instances.map((i) => [i.instance_id, i]));
  const sourceInstance = instances.get(source.instance_id);
  if (!sourceInstance) return { ok: false, reason: `no instance ${source.instance_id}` };
  const targetInstance = instances.get(target.instance_id);
  if (!targetInstance) return { ok: false, reason: `no instance ${target.instance_id}` };
  const sourcePort = types.get(sourceInstance.type_id)?.outputs
    .find((p) => p.port_id === source.port_id);
  if (!sourcePort) {
    return { ok: false, reason: `${source.instance_id} has no output port ${source.port_id}` };
  }
  const targetPort = types.get(targetInstance.type_id)?.inputs
    .find((p) => p.port_id === target.port_id);
  if (!targetPort) {
    return { ok: false, reason: `${target.instance_id} has no input port ${target.port_id}` };
  }
  const sig = (p: { param_types: ValueKind[] }) => p.param_types.join(",");
  if (sig(sourcePort) !== sig(targetPort)) {
    return {
      ok: false,
      reason: `signature mismatch: (${sig(sourcePort)}) -> (${sig(targetPort)})`,
    };
  }
  return { ok: true };
}
