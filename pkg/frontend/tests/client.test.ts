import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { SessionClient, SocketLike } from "../src/client.js";
import type { ServerMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

function setup() {
  const sockets: FakeSocket[] = [];
  const messages: ServerMessage[] = [];
  const statuses: string[] = [];
  const client = new SessionClient(
    "ws://test/session",
    "demo",
    {
      onMessage: (m) => messages.push(m),
      onStatus: (s) => statuses.push(s),
    },
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
  );
  return { client, sockets, messages, statuses };
}

describe("SessionClient", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("sends hello as the first message after opening", () => {
    const { client, sockets } = setup();
    client.connect();
    sockets[0].onopen?.();
    expect(JSON.parse(sockets[0].sent[0])).toEqual({
      type: "hello",
      volume: "demo",
    });
  });

  it("parses replies and surfaces junk as an error message", () => {
    const { client, sockets, messages } = setup();
    client.connect();
    sockets[0].onopen?.();
    sockets[0].onmessage?.({ data: '{"type": "error", "reason": "nope"}' });
    sockets[0].onmessage?.({ data: "garbage" });
    expect(messages[0]).toEqual({ type: "error", reason: "nope" });
    expect(messages[1].type).toBe("error");
  });

  it("drops sends while disconnected instead of throwing", () => {
    const { client, sockets } = setup();
    client.connect();
    expect(() => client.send({ type: "command", text: "list" })).not.toThrow();
    expect(sockets[0].sent).toHaveLength(0);
  });

  it("reconnects after a drop, but no sooner than 1 s", () => {
    const { client, sockets, statuses } = setup();
    client.connect();
    sockets[0].onopen?.();
    sockets[0].onclose?.();
    expect(statuses.at(-1)).toBe("disconnected");
    vi.advanceTimersByTime(999);
    expect(sockets).toHaveLength(1);
    vi.advanceTimersByTime(1);
    expect(sockets).toHaveLength(2);
  });

  it("a deliberate close does not reconnect", () => {
    const { client, sockets } = setup();
    client.connect();
    sockets[0].onopen?.();
    client.close();
    vi.advanceTimersByTime(5000);
    expect(sockets).toHaveLength(1);
  });
});
