// Rate limiter for probe-control bursts: at most maxPerSecond sends, with
// latest-wins coalescing so a slider drag always ends on its final value.

type Clock = () => number;
type Scheduler = (fn: () => void, ms: number) => unknown;

export class RateLimiter<T> {
  private readonly interval: number;
  private lastSent = -Infinity;
  private pending: T | null = null;
  private timerArmed = false;

  constructor(
    private readonly send: (msg: T) => void,
    maxPerSecond = 30,
    private readonly now: Clock = () => Date.now(),
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {
    this.interval = 1000 / maxPerSecond;
  }

  submit(msg: T): void {
    const t = this.now();
    if (t - this.lastSent >= this.interval) {
      this.lastSent = t;
      this.send(msg);
      return;
    }
    this.pending = msg; // replaces any older queued value
    if (!this.timerArmed) {
      this.timerArmed = true;
      this.schedule(() => this.fire(), this.lastSent + this.interval - t);
    }
  }

  private fire(): void {
    this.timerArmed = false;
    if (this.pending === null) return;
    const msg = this.pending;
    this.pending = null;
    this.lastSent = this.now();
    this.send(msg);
  }
}
