// User actions. Each action issues exactly one gateway call and applies
// nothing locally: the graph updates when the server's websocket
// confirmation triggers a document resync. The only client-side logic is
// the type pre-check on drag-to-bind, which refuses an incompatible drop
// before it reaches the wire (the server remains the authority).

import { GatewayClient, GatewayError } from "./client.js";
import { DashboardStore } from "./store.js";
import { EndpointDoc } from "./types.js";
import { canBind } from "./viewmodel.js";

export interface ActionOutcome {
  ok: boolean;
  refusedByPrecheck?: string;
  error?: { name: string; detail: string };
}

export class UserActions {
  constructor(private client: GatewayClient,
              private store: DashboardStore,
              private toast: (message: string) => void = () => {}) {}

  private async run(call: () => Promise<unknown>): Promise<ActionOutcome> {
    try {
      await call();
      return { ok: true };
    } catch (err) {
      if (err instanceof GatewayError) {
        this.toast(`${err.errorName}: ${err.detail}`);
        return { ok: false, error: { name: err.errorName, detail: err.detail } };
      }
      throw err;
    }
  }

  /** Drag-to-bind: pre-check signatures, then one POST. */
  dragBind(source: EndpointDoc, target: EndpointDoc): Promise<ActionOutcome> {
    const doc = this.store.document;
    if (doc) {
      const check = canBind(doc, source, target);
      if (!check.ok) {
        return Promise.resolve({ ok: false, refusedByPrecheck: check.reason });
      }
    }
    return this.run(() => this.client.addBinding(
      this.store.composite,
      `${source.instance_id}.${source.port_id}`,
      [`${target.instance_id}.${target.port_id}`]));
  }

  addInstance(typeId: string, instanceId: string,
              properties: Record<string, unknown>): Promise<ActionOutcome> {
    return this.run(() => this.client.addInstance(
      this.store.composite, typeId, instanceId, properties));
  }

  loadType(typeId: string): Promise<ActionOutcome> {
    return this.run(() => this.client.addType(this.store.composite, typeId));
  }

  addProbe(kind: "sink" | "source", name: string,
           signature: string[]): Promise<ActionOutcome> {
    return this.run(() => this.client.addProbe(
      this.store.composite, kind, name, signature));
  }

  /** Remove whatever is selected: a node or an edge. */
  removeSelection(): Promise<ActionOutcome> {
    const view = this.store.view();
    const selection = view.selection;
    if (!selection) return Promise.resolve({ ok: true });
    if (selection.kind === "edge") {
      return this.run(() => this.client.removeBinding(
        this.store.composite, selection.id));
    }
    const node = view.nodes.find((n) => n.id === selection.id);
    if (node && (node.kind === "probe_sink" || node.kind === "probe_source")) {
      return this.run(() => this.client.removeProbe(
        this.store.composite, selection.id));
    }
    return this.run(() => this.client.removeInstance(
      this.store.composite, selection.id));
  }

  async toggleAdaptation(): Promise<ActionOutcome> {
    const mode = this.store.view().publicationMode;
    const action = mode === "immediate" ? "begin" : "commit";
    const outcome = await this.run(
      () => this.client.adaptation(this.store.composite, action));
    if (outcome.ok) {
      this.store.setPublicationMode(action === "begin" ? "batched" : "immediate");
    }
    return outcome;
  }
}
