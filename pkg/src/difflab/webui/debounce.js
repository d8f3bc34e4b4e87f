// Trailing rate limiter for density requests while scrubbing: at most one
// call per interval, always ending with the most recent arguments.
export class RateLimiter {
    constructor(fn, intervalMs = 100, now = () => Date.now()) {
        this.fn = fn;
        this.intervalMs = intervalMs;
        this.now = now;
        this.lastFire = -Infinity;
        this.pending = null;
        this.timer = null;
    }
    /** Request a call with the latest arguments. Fires immediately when the
     * interval has elapsed; otherwise coalesces into one trailing call. */
    schedule(...args) {
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
    cancel() {
        if (this.timer !== null)
            clearTimeout(this.timer);
        this.timer = null;
        this.pending = null;
    }
}
