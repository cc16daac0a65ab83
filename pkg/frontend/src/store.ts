// Dashboard state: the last assembly document received from the server
// plus event-derived runtime flags. The store never mutates the document
// on its own; an assembly change event triggers a fresh fetch, so the
// rendered graph always converges to GET /composites/{id}/assembly
// within one websocket round trip.

import { GatewayClient } from "./client.js";
import { AssemblyDoc, GatewayEvent, SchemaError, parseAssemblyDoc } from "./types.js";
import {
  GraphView, RuntimeState, Selection, projectAssembly,
} from "./viewmodel.js";

export type Clock = () => number;

const ACTIVITY_MIN_INTERVAL_MS = 100; // at most 10 badge updates/s per node

interface ActivityCell {
  applied: number;
  pending: number;
  lastAppliedAt: number;
}

export class DashboardStore {
  private doc: AssemblyDoc | null = null;
  private frozen = new Set<string>();
  private activity = new Map<string, ActivityCell>();
  private selection: Selection = null;
  private error: string | null = null;
  private publicationMode: "immediate" | "batched" = "immediate";
  private functional: string[] = [];
  private listeners: Array<() => void> = [];
  private syncChain: Promise<void> = Promise.resolve();

  constructor(public composite: string,
              private client: GatewayClient,
              private now: Clock = () => Date.now()) {}

  // -- wiring --

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private changed(): void {
    for (const listener of [...this.listeners]) listener();
  }

  /** Resolves when every sync triggered so far has settled. */
  get settled(): Promise<void> {
    return this.syncChain;
  }

  // -- document intake --

  /** Apply a raw assembly document; malformed input keeps the previous
   * graph and raises the error banner instead. */
  renderAssembly(raw: unknown): void {
    try {
      this.doc = parseAssemblyDoc(raw);
      this.error = null;
    } catch (err) {
      if (err instanceof SchemaError) {
        this.error = err.message;
      } else {
        throw err;
      }
    }
    this.changed();
  }

  resync(): Promise<void> {
    return this.enqueueSync();
  }

  private enqueueSync(): Promise<void> {
    this.syncChain = this.syncChain.then(async () => {
      try {
        const doc = await this.client.getAssembly(this.composite);
        this.doc = doc;
        this.error = null;
      } catch (err) {
        this.error = err instanceof Error ? err.message : String(err);
      }
      this.changed();
    });
    return this.syncChain;
  }

  // -- event intake --

  handleEvent(event: GatewayEvent): void {
    switch (event.event) {
      case "assembly":
        if (event.composite === this.composite) this.enqueueSync();
        break;
      case "interface":
        if (event.composite === this.composite) {
          this.functional = [...event.functional];
          this.changed();
        }
        break;
      case "discovery":
        if (event.change === "lost") {
          this.frozen.add(event.uid);
        } else {
          this.frozen.delete(event.uid);
        }
        this.changed();
        break;
      case "dispatch":
        if (event.composite === this.composite) {
          const instanceId = event.root.split(".")[0];
          this.recordActivity(instanceId);
        }
        break;
    }
  }

  setPublicationMode(mode: "immediate" | "batched"): void {
    this.publicationMode = mode;
    this.changed();
  }

  // -- activity throttling --

  private recordActivity(instanceId: string): void {
    const cell = this.activity.get(instanceId) ??
      { applied: 0, pending: 0, lastAppliedAt: -Infinity };
    cell.pending += 1;
    this.activity.set(instanceId, cell);
    this.maybeApply(instanceId, cell);
  }

  private maybeApply(instanceId: string, cell: ActivityCell): void {
    if (this.now() - cell.lastAppliedAt >= ACTIVITY_MIN_INTERVAL_MS &&
        cell.pending > 0) {
      cell.applied += cell.pending;
      cell.pending = 0;
      cell.lastAppliedAt = this.now();
      this.changed();
    }
  }

  /** Apply throttled activity that became due; call from a render tick. */
  flushActivity(): void {
    for (const [instanceId, cell] of this.activity) {
      this.maybeApply(instanceId, cell);
    }
  }

  // -- selection --

  select(selection: Selection): void {
    this.selection = selection;
    this.changed();
  }

  // -- projection --

  get document(): AssemblyDoc | null {
    return this.doc;
  }

  private runtime(): RuntimeState {
    return {
      frozenServiceUids: this.frozen,
      activity: new Map([...this.activity].map(
        ([id, cell]) => [id, cell.applied])),
      selection: this.selection,
      error: this.error,
      publicationMode: this.publicationMode,
      functional: this.functional,
    };
  }

  view(): GraphView {
    return projectAssembly(this.composite, this.doc, this.runtime());
  }
}
