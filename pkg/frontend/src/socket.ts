// Event socket: one websocket per viewed composite, reconnect with a
// full resync (the store refetches the assembly document).

import { GatewayEvent } from "./types.js";

export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export class EventSocket {
  private socket: SocketLike | null = null;
  private closed = false;
  private retryMs = 500;

  constructor(private url: string,
              private onEvent: (event: GatewayEvent) => void,
              private onReconnect: () => void,
              private factory: SocketFactory,
              private schedule: (fn: () => void, ms: number) => void =
                (fn, ms) => { setTimeout(fn, ms); }) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    let wasOpen = false;
    socket.onopen = () => {
      wasOpen = true;
      this.retryMs = 500;
      this.onReconnect();
    };
    socket.onmessage = (message) => {
      let parsed: GatewayEvent;
      try {
        parsed = JSON.parse(String(message.data)) as GatewayEvent;
      } catch {
        return; // not a protocol frame
      }
      this.onEvent(parsed);
    };
    socket.onclose = () => {
      if (this.closed) return;
      this.retryMs = Math.min(this.retryMs * 2, 10_000);
      this.schedule(() => this.connect(), wasOpen ? 500 : this.retryMs);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
