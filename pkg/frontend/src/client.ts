// Session transport: opens the WebSocket, says hello, parses replies, and
// reconnects no faster than once per second after a drop.

import { parseServerMessage, ProtocolError } from "./protocol.js";
import type { ClientMessage, ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientEvents {
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: "connecting" | "connected" | "disconnected") => void;
}

const MIN_RECONNECT_MS = 1000;

export class SessionClient {
  private socket: SocketLike | null = null;
  private open = false;
  private closedByUser = false;

  constructor(
    private readonly url: string,
    private readonly volume: string,
    private readonly events: ClientEvents,
    private readonly makeSocket: SocketFactory = (u) =>
      new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.events.onStatus("connecting");
    const ws = this.makeSocket(this.url);
    this.socket = ws;
    ws.onopen = () => {
      this.open = true;
      this.events.onStatus("connected");
      ws.send(JSON.stringify({ type: "hello", volume: this.volume }));
    };
    ws.onmessage = (ev) => {
      try {
        this.events.onMessage(parseServerMessage(String(ev.data)));
      } catch (e) {
        if (!(e instanceof ProtocolError)) throw e;
        this.events.onMessage({ type: "error", reason: e.message });
      }
    };
    ws.onclose = () => {
      this.open = false;
      this.events.onStatus("disconnected");
      if (!this.closedByUser) {
        setTimeout(() => this.connect(), MIN_RECONNECT_MS);
      }
    };
    ws.onerror = () => {
      /* onclose follows and owns the state change */
    };
  }

  get connected(): boolean {
    return this.open;
  }

  send(msg: ClientMessage): void {
    if (!this.socket || !this.open) return; // dropped; UI shows disconnected
    this.socket.send(JSON.stringify(msg));
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }
}
