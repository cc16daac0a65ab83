// Thin typed wrapper over the gateway REST surface. Every mutation here
// is one HTTP call; nothing is applied locally -- confirmation arrives
// through the event socket.

import {
  AssemblyDoc, CompositeInfo, ServiceInfo, parseAssemblyDoc,
} from "./types.js";

export class GatewayError extends Error {
  constructor(public errorName: string, public detail: string,
              public status: number) {
    super(`${errorName}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(private baseUrl: string,
              private fetchImpl: FetchLike = (...args) => fetch(...args)) {}

  private async request(method: string, path: string,
                        body?: unknown): Promise<unknown> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const doc = payload as { error?: string; detail?: string };
      throw new GatewayError(doc.error ?? `HTTP${response.status}`,
                             doc.detail ?? "", response.status);
    }
    return payload;
  }

  getServices(): Promise<ServiceInfo[]> {
    return this.request("GET", "/services") as Promise<ServiceInfo[]>;
  }

  getComposites(): Promise<CompositeInfo[]> {
    return this.request("GET", "/composites") as Promise<CompositeInfo[]>;
  }

  async getAssembly(name: string): Promise<AssemblyDoc> {
    const raw = await this.request("GET", `/composites/${name}/assembly`);
    return parseAssemblyDoc(raw);
  }

  async getTypeIds(): Promise<string[]> {
    const doc = await this.request("GET", "/types") as { type_ids: string[] };
    return doc.type_ids;
  }

  addType(composite: string, typeId: string): Promise<unknown> {
    return this.request("POST", `/composites/${composite}/types`,
                        { type_id: typeId });
  }

  removeType(composite: string, typeId: string): Promise<unknown> {
    return this.request("DELETE", `/composites/${composite}/types/${typeId}`);
  }

  addInstance(composite: string, typeId: string, instanceId: string,
              properties: Record<string, unknown> = {}): Promise<unknown> {
    return this.request("POST", `/composites/${composite}/instances`, {
      type_id: typeId, instance_id: instanceId, properties,
    });
  }

  removeInstance(composite: string, instanceId: string): Promise<unknown> {
    return this.request("DELETE",
                        `/composites/${composite}/instances/${instanceId}`);
  }

  async addBinding(composite: string, source: string, targets: string[],
                   bindingId?: string): Promise<string> {
    const doc = await this.request("POST", `/composites/${composite}/bindings`, {
      source, targets, binding_id: bindingId ?? null,
    }) as { binding_id: string };
    return doc.binding_id;
  }

  removeBinding(composite: string, bindingId: string): Promise<unknown> {
    return this.request("DELETE",
                        `/composites/${composite}/bindings/${bindingId}`);
  }

  addProbe(composite: string, kind: "sink" | "source", name: string,
           signature: string[]): Promise<unknown> {
    return this.request("POST", `/composites/${composite}/probes`,
                        { kind, name, signature });
  }

  removeProbe(composite: string, probeInstanceId: string): Promise<unknown> {
    return this.request("DELETE",
                        `/composites/${composite}/probes/${probeInstanceId}`);
  }

  adaptation(composite: string, action: "begin" | "commit"): Promise<unknown> {
    return this.request("POST", `/composites/${composite}/adaptation`,
                        { action });
  }
}
