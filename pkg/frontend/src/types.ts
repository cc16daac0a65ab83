// Gateway contract types (docs/gateway.md, docs/assembly-doc.md).

export type ValueKind = "bool" | "int" | "float" | "string" | "blob";

export type ComponentKind =
  | "basic"
  | "proxy"
  | "probe_sink"
  | "probe_source"
  | "sequence";

export interface PortDoc {
  port_id: string;
  direction: "input" | "output";
  param_types: ValueKind[];
  doc: string;
}

export interface PropertyDoc {
  name: string;
  kind: ValueKind;
  default: unknown;
}

export interface TypeDoc {
  type_id: string;
  kind: ComponentKind;
  inputs: PortDoc[];
  outputs: PortDoc[];
  properties: PropertyDoc[];
}

export interface EndpointDoc {
  instance_id: string;
  port_id: string;
}

export interface InstanceDoc {
  instance_id: string;
  type_id: string;
  property_values: Record<string, unknown>;
}

export interface BindingDoc {
  binding_id: string | null;
  source: EndpointDoc;
  targets: EndpointDoc[];
}

export interface AssemblyDoc {
  types: TypeDoc[];
  instances: InstanceDoc[];
  bindings: BindingDoc[];
}

export interface ServiceInfo {
  uid: string;
  kinds: string[];
  endpoint: string;
}

export interface CompositeInfo {
  name: string;
  uid: string;
  control_uid: string;
  publication_mode: "immediate" | "batched";
  functional: string[];
}

export type GatewayEvent =
  | { event: "discovery"; change: "found" | "lost"; uid: string;
      kinds?: string[]; endpoint?: string }
  | { event: "assembly"; composite: string; change: string;
      detail: Record<string, unknown> }
  | { event: "interface"; composite: string; functional: string[] }
  | { event: "dispatch"; composite: string; trace: string; root: string;
      events: number };

export class SchemaError extends Error {}

const KINDS: ComponentKind[] = [
  "basic", "proxy", "probe_sink", "probe_source", "sequence",
];

function fail(path: string, reason: string): never {
  throw new SchemaError(`${path}: ${reason}`);
}

function asArray(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) fail(path, "expected an array");
  return value;
}

function asObject(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    fail(path, "expected an object");
  }
  return value as Record<string, unknown>;
}

function asString(value: unknown, path: string): string {
  if (typeof value !== "string") fail(path, "expected a string");
  return value;
}

function parsePort(raw: unknown, path: string): PortDoc {
  const obj = asObject(raw, path);
  const direction = asString(obj.direction, `${path}.direction`);
  if (direction !== "input" && direction !== "output") {
    fail(`${path}.direction`, `bad direction ${direction}`);
  }
  return {
    port_id: asString(obj.port_id, `${path}.port_id`),
    direction,
    param_types: asArray(obj.param_types, `${path}.param_types`).map(
      (k, i) => asString(k, `${path}.param_types[${i}]`) as ValueKind),
    doc: typeof obj.doc === "string" ? obj.doc : "",
  };
}

function parseEndpoint(raw: unknown, path: string): EndpointDoc {
  const obj = asObject(raw, path);
  return {
    instance_id: asString(obj.instance_id, `${path}.instance_id`),
    port_id: asString(obj.port_id, `${path}.port_id`),
  };
}

/** Validate a raw assembly document; throws SchemaError when malformed. */
export function parseAssemblyDoc(raw: unknown): AssemblyDoc {
  const doc = asObject(raw, "assembly");
  const types = asArray(doc.types, "assembly.types").map((t, i) => {
    const path = `assembly.types[${i}]`;
    const obj = asObject(t, path);
    const kind = asString(obj.kind, `${path}.kind`) as ComponentKind;
    if (!KINDS.includes(kind)) fail(`${path}.kind`, `unknown kind ${kind}`);
    return {
      type_id: asString(obj.type_id, `${path}.type_id`),
      kind,
      inputs: asArray(obj.inputs, `${path}.inputs`).map(
        (p, j) => parsePort(p, `${path}.inputs[${j}]`)),
      outputs: asArray(obj.outputs, `${path}.outputs`).map(
        (p, j) => parsePort(p, `${path}.outputs[${j}]`)),
      properties: asArray(obj.properties ?? [], `${path}.properties`).map(
        (p, j) => {
          const prop = asObject(p, `${path}.properties[${j}]`);
          return {
            name: asString(prop.name, `${path}.properties[${j}].name`),
            kind: asString(prop.kind, `${path}.properties[${j}].kind`) as ValueKind,
            default: prop.default,
          };
        }),
    };
  });
  const instances = asArray(doc.instances, "assembly.instances").map((r, i) => {
    const path = `assembly.instances[${i}]`;
    const obj = asObject(r, path);
    return {
      instance_id: asString(obj.instance_id, `${path}.instance_id`),
      type_id: asString(obj.type_id, `${path}.type_id`),
      property_values: asObject(obj.property_values ?? {}, `${path}.property_values`),
    };
  });
  const bindings = asArray(doc.bindings, "assembly.bindings").map((r, i) => {
    const path = `assembly.bindings[${i}]`;
    const obj = asObject(r, path);
    return {
      binding_id: obj.binding_id == null ? null
        : asString(obj.binding_id, `${path}.binding_id`),
      source: parseEndpoint(obj.source, `${path}.source`),
      targets: asArray(obj.targets, `${path}.targets`).map(
        (t, j) => parseEndpoint(t, `${path}.targets[${j}]`)),
    };
  });
  // referential integrity: mirror of the container invariant
  const byId = new Map(instances.map((inst) => [inst.instance_id, inst]));
  for (const binding of bindings) {
    if (!byId.has(binding.source.instance_id)) {
      fail("assembly.bindings", `source ${binding.source.instance_id} missing`);
    }
    for (const target of binding.targets) {
      if (!byId.has(target.instance_id)) {
        fail("assembly.bindings", `target ${target.instance_id} missing`);
      }
    }
  }
  return { types, instances, bindings };
}
