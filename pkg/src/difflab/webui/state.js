// UI state: selections, playback clock, and stale-response discarding.
// Pure logic only — no DOM — so it is unit-testable.
export const ALL_SAMPLERS = ["ancestral", "deterministic", "euler_ode"];
export const PLAYBACK_MS = 4000; // t: 0 -> 1
export function clampT(t) {
    if (!Number.isFinite(t))
        return 0;
    return Math.min(Math.max(t, 0), 1);
}
/** Samplers the current model supports; everything else gets disabled in
 * the menu. No model means nothing is enabled. */
export function enabledSamplers(model) {
    return model ? model.samplers : [];
}
/** Keep the selection if still compatible, otherwise fall back to the
 * model's first supported sampler (null when there is no model). */
export function reconcileSampler(selected, model) {
    const enabled = enabledSamplers(model);
    if (enabled.length === 0)
        return null;
    return selected !== null && enabled.includes(selected) ? selected : enabled[0];
}
export class PlaybackClock {
    constructor(durationMs = PLAYBACK_MS) {
        this.durationMs = durationMs;
        this.state = "paused";
        this.t = 0;
        this.startedAt = 0;
        this.startT = 0;
    }
    play(nowMs) {
        this.startT = this.t >= 1 ? 0 : this.t; // replay from the start at the end
        this.startedAt = nowMs;
        this.state = "playing";
    }
    pause() {
        this.state = "paused";
    }
    scrub(t) {
        this.t = clampT(t);
        this.state = "scrubbing";
    }
    /** Advance to wall-clock nowMs; returns the current t. Pauses at t=1. */
    tick(nowMs) {
        if (this.state === "playing") {
            this.t = clampT(this.startT + (nowMs - this.startedAt) / this.durationMs);
            if (this.t >= 1)
                this.state = "paused";
        }
        return this.t;
    }
}
/** Monotone counter guarding async responses: a response is applied only
 * when no newer request has been issued for the same slot. */
export class RequestEpoch {
    constructor() {
        this.issued = 0;
        this.applied = 0;
    }
    next() {
        return ++this.issued;
    }
    /** True (and records it) when `epoch` is newer than anything applied. */
    accept(epoch) {
        if (epoch <= this.applied)
            return false;
        this.applied = epoch;
        return true;
    }
}
