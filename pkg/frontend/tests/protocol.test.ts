import { describe, expect, it } from "vitest";
import { parseServerMessage, ProtocolError } from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("accepts each documented reply type", () => {
    const samples = [
      { type: "hello", nx: 4, ny: 4, nz: 2, sx: 1, sy: 1, z_table: [0, 1], origin: [0, 0, 0], palette: [] },
      { type: "frame", seq: 1, scale: 1, mode: "plane", images: [], geometry: {} },
      { type: "annotations", items: [] },
      { type: "pick_result", hit: false },
      { type: "command_result", ok: true, message: "ok" },
      { type: "error", reason: "nope" },
    ];
    for (const s of samples) {
      expect(parseServerMessage(JSON.stringify(s)).type).toBe(s.type);
    }
  });

  it("rejects non-JSON and unknown types", () => {
    expect(() => parseServerMessage("{oops")).toThrow(ProtocolError);
    expect(() => parseServerMessage('"just a string"')).toThrow(ProtocolError);
    expect(() => parseServerMessage('{"type": "mystery"}')).toThrow(ProtocolError);
  });

  it("rejects structurally broken frames and errors", () => {
    expect(() => parseServerMessage('{"type": "frame", "seq": 1}')).toThrow(
      ProtocolError,
    );
    expect(() => parseServerMessage('{"type": "error"}')).toThrow(ProtocolError);
  });
});
