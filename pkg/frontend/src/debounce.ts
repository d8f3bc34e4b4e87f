// Trailing rate limiter for density requests while scrubbing: at most one
// call per interval, always ending with the most recent arguments.

export class RateLimiter<A extends unknown[]> {
  private lastFire = -Infinity;
  private pending: A | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private fn: (...args: A) => void,
    private intervalMs: number = 100,
    private now: () => number = () => Date.now(),
  ) {}

  /** Request a call with the latest arguments. Fires immediately when the
   * interval has elapsed; otherwise coalesces into one trailing call. */
  schedule(...args: A): void {
    const elapsed = this.now() - this.lastFire;
    if (elapsed >= this.intervalMs && this.timer === null) {
      this.lastFire = this.now();
      this.fn(...args);
      return;
    }
    this.pending = args;
    if (this.timer === null) {
      this.timer = setTimeout(() => {
        this.timer = null;
        if (this.pending) {
          const next = this.pending;
          this.pending = null;
          this.lastFire = this.now();
          this.fn(...next);
        }
      }, Math.max(0, this.intervalMs - elapsed));
    }
  }

  cancel(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.pending = null;
  }
}
