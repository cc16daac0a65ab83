// In-memory gateway double implementing the documented REST+WS contract
// semantics (docs/gateway.md, docs/assembly-doc.md): typed bindings,
// cascade on instance removal, probe-driven functional interface,
// batched adaptation. Tests drive the dashboard against it and compare
// the rendered state with fresh GETs, mirroring how the real gateway is
// verified on the backend side.

import { GatewayClient } from "../src/client.js";
import {
  AssemblyDoc, BindingDoc, GatewayEvent, InstanceDoc, TypeDoc,
} from "../src/types.js";

const LIBRARY: TypeDoc[] = [
  {
    type_id: "threshold", kind: "basic",
    inputs: [{ port_id: "in", direction: "input", param_types: ["float"], doc: "" }],
    outputs: [{ port_id: "out", direction: "output", param_types: ["bool"], doc: "" }],
    properties: [{ name: "limit", kind: "float", default: 0.5 }],
  },
  {
    type_id: "recorder_bool", kind: "basic",
    inputs: [{ port_id: "in", direction: "input", param_types: ["bool"], doc: "" }],
    outputs: [], properties: [],
  },
  {
    type_id: "relay_float", kind: "basic",
    inputs: [{ port_id: "in", direction: "input", param_types: ["float"], doc: "" }],
    outputs: [{ port_id: "out", direction: "output", param_types: ["float"], doc: "" }],
    properties: [],
  },
  {
    type_id: "seq2_bool", kind: "sequence",
    inputs: [{ port_id: "in", direction: "input", param_types: ["bool"], doc: "" }],
    outputs: [
      { port_id: "out1", direction: "output", param_types: ["bool"], doc: "" },
      { port_id: "out2", direction: "output", param_types: ["bool"], doc: "" },
    ],
    properties: [],
  },
  {
    type_id: "proxy:light-1", kind: "proxy",
    inputs: [{ port_id: "SetTarget", direction: "input", param_types: ["int"], doc: "" }],
    outputs: [{ port_id: "evt_Status", direction: "output", param_types: ["bool"], doc: "" }],
    properties: [{ name: "remote_timeout_ms", kind: "int", default: 5000 }],
  },
];

interface FaultBody {
  error: string;
  detail: string;
}

class Fault extends Error {
  constructor(public status: number, public body: FaultBody) {
    super(body.error);
  }
}

export class MockGateway {
  types = new Map<string, TypeDoc>();
  instances = new Map<string, InstanceDoc>();
  bindings = new Map<string, BindingDoc>();
  probes = new Map<string, { kind: "sink" | "source"; name: string }>();
  adaptationOpen = false;
  events: GatewayEvent[] = [];
  bindingSeq = 1;
  calls: string[] = [];

  constructor(public composite = "room1") {}

  client(): GatewayClient {
    return new GatewayClient("http://mock", this.fetchImpl);
  }

  private fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const path = url.replace("http://mock", "");
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    this.calls.push(`${method} ${path}`);
    try {
      const payload = this.route(method, path, body);
      return new Response(JSON.stringify(payload), { status: 200 });
    } catch (err) {
      if (err instanceof Fault) {
        return new Response(JSON.stringify(err.body), { status: err.status });
      }
      throw err;
    }
  };

  private route(method: string, path: string, body: any): unknown {
    const parts = path.split("/").filter(Boolean);
    if (method === "GET" && path === "/services") return [];
    if (method === "GET" && path === "/types") {
      return { type_ids: LIBRARY.map((t) => t.type_id) };
    }
    if (method === "GET" && path === "/composites") {
      return [{
        name: this.composite, uid: `mock:${this.composite}`,
        control_uid: `mock:${this.composite}:ctl`,
        publication_mode: this.adaptationOpen ? "batched" : "immediate",
        functional: this.functionalUids(),
      }];
    }
    if (parts[0] !== "composites" || parts[1] !== this.composite) {
      throw new Fault(404, { error: "UnknownComposite", detail: path });
    }
    const section = parts[2];
    if (method === "GET" && section === "assembly") return this.assemblyDoc();
    if (section === "types") {
      if (method === "POST") return this.addType(body.type_id);
      return this.removeType(parts[3]);
    }
    if (section === "instances") {
      if (method === "POST") {
        return this.addInstance(body.type_id, body.instance_id,
                                body.properties ?? {});
      }
      return this.removeInstance(parts[3]);
    }
    if (section === "bindings") {
      if (method === "POST") {
        return this.addBinding(body.source, body.targets, body.binding_id);
      }
      return this.removeBinding(parts[3]);
    }
    if (section === "probes") {
      if (method === "POST") return this.addProbe(body.kind, body.name, body.signature);
      return this.removeProbe(parts[3]);
    }
    if (section === "adaptation" && method === "POST") {
      return this.adaptation(body.action);
    }
    throw new Fault(404, { error: "UnknownRoute", detail: path });
  }

  // -- semantics (the same rules the control service enforces) --

  private emit(event: GatewayEvent): void {
    this.events.push(event);
  }

  private assemblyEvent(change: string, detail: Record<string, unknown>): void {
    this.emit({ event: "assembly", composite: this.composite, change, detail });
  }

  private functionalUids(): string[] {
    return [...this.probes.entries()]
      .map(([, probe]) => `mock:${this.composite}:fn:${probe.kind}:${probe.name}`)
      .sort();
  }

  private publishInterface(): void {
    if (this.adaptationOpen) return;
    this.emit({ event: "interface", composite: this.composite,
                functional: this.functionalUids() });
  }

  addType(typeId: string): unknown {
    const template = LIBRARY.find((t) => t.type_id === typeId);
    if (!template) throw new Fault(404, { error: "UnknownTypeId", detail: typeId });
    if (this.types.has(typeId)) {
      throw new Fault(422, { error: "DuplicateTypeId", detail: typeId });
    }
    this.types.set(typeId, template);
    this.assemblyEvent("type_registered", { type_id: typeId });
    return { ok: true };
  }

  removeType(typeId: string): unknown {
    if (!this.types.delete(typeId)) {
      throw new Fault(404, { error: "UnknownTypeId", detail: typeId });
    }
    this.assemblyEvent("type_unregistered", { type_id: typeId });
    return { ok: true };
  }

  addInstance(typeId: string, instanceId: string,
              properties: Record<string, unknown>): unknown {
    const type = this.types.get(typeId);
    if (!type) throw new Fault(404, { error: "UnknownTypeId", detail: typeId });
    if (this.instances.has(instanceId)) {
      throw new Fault(422, { error: "DuplicateInstanceId", detail: instanceId });
    }
    const values: Record<string, unknown> = {};
    for (const prop of type.properties) values[prop.name] = prop.default;
    Object.assign(values, properties);
    this.instances.set(instanceId,
                       { instance_id: instanceId, type_id: typeId,
                         property_values: values });
    this.assemblyEvent("instance_added",
                       { instance_id: instanceId, type_id: typeId });
    return { ok: true, instance_id: instanceId };
  }

  removeInstance(instanceId: string): unknown {
    const instance = this.instances.get(instanceId);
    if (!instance) {
      throw new Fault(404, { error: "UnknownInstanceId", detail: instanceId });
    }
    for (const [bindingId, binding] of [...this.bindings]) {
      const touches = binding.source.instance_id === instanceId ||
        binding.targets.some((t) => t.instance_id === instanceId);
      if (touches) {
        this.bindings.delete(bindingId);
        this.assemblyEvent("binding_removed", { binding_id: bindingId });
      }
    }
    this.instances.delete(instanceId);
    this.assemblyEvent("instance_removed", { instance_id: instanceId });
    return { ok: true };
  }

  addBinding(source: string, targets: string[], bindingId?: string | null): unknown {
    const id = bindingId ?? `b${this.bindingSeq++}`;
    const parse = (ref: string) => {
      const dot = ref.lastIndexOf(".");
      return { instance_id: ref.slice(0, dot), port_id: ref.slice(dot + 1) };
    };
    const endpointPort = (ref: { instance_id: string; port_id: string },
                          direction: "input" | "output") => {
      const instance = this.instances.get(ref.instance_id);
      if (!instance) {
        throw new Fault(404, { error: "UnknownEndpoint", detail: ref.instance_id });
      }
      const type = this.types.get(instance.type_id)!;
      const ports = direction === "input" ? type.inputs : type.outputs;
      const port = ports.find((p) => p.port_id === ref.port_id);
      if (!port) {
        throw new Fault(404, { error: "UnknownEndpoint",
                               detail: `${ref.instance_id}.${ref.port_id}` });
      }
      return port;
    };
    const sourceRef = parse(source);
    const sourcePort = endpointPort(sourceRef, "output");
    const targetRefs = targets.map(parse);
    for (const ref of targetRefs) {
      const port = endpointPort(ref, "input");
      if (port.param_types.join(",") !== sourcePort.param_types.join(",")) {
        throw new Fault(422, { error: "TypeMismatch",
                               detail: `${source} -> ${ref.instance_id}.${ref.port_id}` });
      }
    }
    this.bindings.set(id, { binding_id: id, source: sourceRef,
                            targets: targetRefs });
    this.assemblyEvent("binding_added", { binding_id: id });
    return { ok: true, binding_id: id };
  }

  removeBinding(bindingId: string): unknown {
    if (!this.bindings.delete(bindingId)) {
      throw new Fault(404, { error: "UnknownBindingId", detail: bindingId });
    }
    this.assemblyEvent("binding_removed", { binding_id: bindingId });
    return { ok: true };
  }

  addProbe(kind: "sink" | "source", name: string, signature: string[]): unknown {
    for (const probe of this.probes.values()) {
      if (probe.kind === kind && probe.name === name) {
        throw new Fault(422, { error: "DuplicateExportName", detail: name });
      }
    }
    const typeId = `${kind}:${name}`;
    const port = {
      port_id: name,
      direction: (kind === "sink" ? "output" : "input") as "output" | "input",
      param_types: signature as TypeDoc["inputs"][number]["param_types"],
      doc: "",
    };
    this.types.set(typeId, {
      type_id: typeId,
      kind: kind === "sink" ? "probe_sink" : "probe_source",
      inputs: kind === "sink" ? [] : [port],
      outputs: kind === "sink" ? [port] : [],
      properties: [],
    });
    this.assemblyEvent("type_registered", { type_id: typeId });
    const instanceId = `${kind}-${name}`;
    this.instances.set(instanceId, {
      instance_id: instanceId, type_id: typeId, property_values: {},
    });
    this.probes.set(instanceId, { kind, name });
    this.assemblyEvent("instance_added",
                       { instance_id: instanceId, type_id: typeId });
    this.publishInterface();
    return { ok: true, probe_instance_id: instanceId };
  }

  removeProbe(instanceId: string): unknown {
    if (!this.probes.delete(instanceId)) {
      throw new Fault(404, { error: "UnknownInstanceId", detail: instanceId });
    }
    this.removeInstance(instanceId);
    this.publishInterface();
    return { ok: true };
  }

  adaptation(action: "begin" | "commit"): unknown {
    if (action === "begin") {
      this.adaptationOpen = true;
    } else {
      if (!this.adaptationOpen) {
        throw new Fault(422, { error: "NoOpenAdaptation", detail: this.composite });
      }
      this.adaptationOpen = false;
      this.publishInterface();
    }
    return { ok: true, action };
  }

  assemblyDoc(): AssemblyDoc {
    const byId = <T>(key: (x: T) => string) =>
      (a: T, b: T) => key(a).localeCompare(key(b));
    return {
      types: [...this.types.values()].sort(byId((t) => t.type_id)),
      instances: [...this.instances.values()].sort(byId((i) => i.instance_id)),
      bindings: [...this.bindings.values()].sort(byId((b) => b.binding_id ?? "")),
    };
  }

  /** Deliver queued events in order; returns how many were delivered. */
  pump(handle: (event: GatewayEvent) => void): number {
    const queued = this.events;
    this.events = [];
    for (const event of queued) handle(event);
    return queued.length;
  }
}
