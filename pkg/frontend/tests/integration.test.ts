// End-to-end run against the real server: control change -> frame within
// 200 ms, click-pick names the phantom sphere, and a typed command updates
// the display. Spawns the Python server as a child process.

import { spawn, ChildProcess } from "node:child_process";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { pickRay } from "../src/math.js";
import { parseServerMessage } from "../src/protocol.js";
import type {
  FrameMsg,
  HelloReply,
  PlaneGeometry,
  ServerMessage,
} from "../src/protocol.js";
import { controlsFromHello, controlsToSetPlane } from "../src/state.js";

const PORT = 8900 + Math.floor(Math.random() * 100);
const HERE = dirname(fileURLToPath(import.meta.url));

let server: ChildProcess;
let ws: WebSocket;
const inbox: ServerMessage[] = [];

function waitFor<T extends ServerMessage>(
  type: T["type"],
  timeoutMs = 5000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  return new Promise((resolve, reject) => {
    const poll = () => {
      const idx = inbox.findIndex((m) => m.type === type);
      if (idx >= 0) {
        resolve(inbox.splice(idx, 1)[0] as T);
        return;
      }
      if (Date.now() > deadline) {
        reject(new Error(`timed out waiting for ${type}`));
        return;
      }
      setTimeout(poll, 2);
    };
    poll();
  });
}

beforeAll(async () => {
  server = spawn("python3", [join(HERE, "serve_fixture.py"), String(PORT)], {
    stdio: ["ignore", "inherit", "inherit"],
  });
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const res = await fetch(`http://127.0.0.1:${PORT}/volumes`);
      const body = (await res.json()) as { volumes: string[] };
      expect(body.volumes).toEqual(["demo"]);
      break;
    } catch {
      if (Date.now() > deadline) throw new Error("server did not come up");
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  ws = new WebSocket(`ws://127.0.0.1:${PORT}/session`);
  ws.on("message", (data) => inbox.push(parseServerMessage(data.toString())));
  await new Promise<void>((resolve) => ws.on("open", () => resolve()));
}, 30_000);

afterAll(() => {
  ws?.close();
  server?.kill();
});

describe("viewer against a live server", () => {
  let hello: HelloReply;
  let frame: FrameMsg;

  it("hello populates meta and an initial frame arrives", async () => {
    ws.send(JSON.stringify({ type: "hello", volume: "demo" }));
    hello = await waitFor<HelloReply>("hello");
    frame = await waitFor<FrameMsg>("frame");
    await waitFor("annotations");
    expect(hello.palette.map((p) => p.name)).toEqual(["sphere"]);
    expect(frame.images[0].png_b64.length).toBeGreaterThan(0);
  });

  it("a control change yields a rendered frame within 200 ms", async () => {
    const controls = { ...controlsFromHello(hello), cz: hello.z_table[5] };
    const t0 = Date.now();
    ws.send(JSON.stringify(controlsToSetPlane(controls)));
    frame = await waitFor<FrameMsg>("frame");
    await waitFor("annotations");
    expect(Date.now() - t0).toBeLessThan(200);
    expect(frame.mode).toBe("plane");
  });

  it("clicking the sphere names it", async () => {
    const g = frame.geometry as PlaneGeometry;
    const { w, h } = frame.images[0];
    // center pixel of the slice through the sphere
    const ray = pickRay(g, Math.floor(w / 2), Math.floor(h / 2), w, h);
    ws.send(JSON.stringify({ type: "pick", ...ray }));
    const res = await waitFor<ServerMessage & { type: "pick_result" }>(
      "pick_result",
    );
    expect(res.hit).toBe(true);
    expect(res.name).toBe("sphere");
  });

  it("a typed slice command updates the display", async () => {
    const before = frame.seq;
    const z = hello.z_table[2];
    ws.send(JSON.stringify({ type: "command", text: `slice axial ${z}` }));
    const result = await waitFor<ServerMessage & { type: "command_result" }>(
      "command_result",
    );
    expect(result.ok).toBe(true);
    frame = await waitFor<FrameMsg>("frame");
    expect(frame.seq).toBeGreaterThan(before);
    expect(frame.images[0].png_b64.length).toBeGreaterThan(0);
  });

  it("a parse error comes back with token position info", async () => {
    ws.send(JSON.stringify({ type: "command", text: "slice diagonal 3" }));
    const result = await waitFor<ServerMessage & { type: "command_result" }>(
      "command_result",
    );
    expect(result.ok).toBe(false);
    expect(result.message).toContain("token 1");
  });
});
