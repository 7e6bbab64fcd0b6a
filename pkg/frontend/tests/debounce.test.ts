import { describe, expect, it } from "vitest";
import { RateLimiter } from "../src/debounce.js";

/** Deterministic clock + scheduler so no real timers are involved. */
function harness(maxPerSecond = 30) {
  let t = 0;
  const sent: Array<{ at: number; msg: number }> = [];
  const timers: Array<{ due: number; fn: () => void }> = [];
  const limiter = new RateLimiter<number>(
    (msg) => sent.push({ at: t, msg }),
    maxPerSecond,
    () => t,
    (fn, ms) => timers.push({ due: t + ms, fn }),
  );
  const advance = (to: number) => {
    while (true) {
      const next = timers
        .filter((x) => x.due <= to)
        .sort((a, b) => a.due - b.due)[0];
      if (!next) break;
      timers.splice(timers.indexOf(next), 1);
      t = next.due;
      next.fn();
    }
    t = to;
  };
  return { limiter, sent, advance, now: () => t };
}

describe("RateLimiter", () => {
  it("passes isolated messages straight through", () => {
    const h = harness();
    h.limiter.submit(1);
    h.advance(100);
    h.limiter.submit(2);
    expect(h.sent.map((s) => s.msg)).toEqual([1, 2]);
  });

  it("caps a rapid burst at the configured rate", () => {
    const h = harness(30);
    // a 1-second slider drag emitting every 2 ms
    for (let ms = 0; ms <= 1000; ms += 2) {
      h.advance(ms);
      h.limiter.submit(ms);
    }
    h.advance(2000);
    expect(h.sent.length).toBeLessThanOrEqual(31);
    for (let i = 1; i < h.sent.length; i++) {
      expect(h.sent[i].at - h.sent[i - 1].at).toBeGreaterThanOrEqual(
        1000 / 30 - 1e-9,
      );
    }
  });

  it("coalesces to the latest value and always flushes the tail", () => {
    const h = harness(30);
    h.limiter.submit(1); // sent immediately
    h.limiter.submit(2); // queued
    h.limiter.submit(3); // replaces 2
    h.advance(500);
    expect(h.sent.map((s) => s.msg)).toEqual([1, 3]);
  });
});
