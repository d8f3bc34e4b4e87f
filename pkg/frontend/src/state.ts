// UI state: selections, playback clock, and stale-response discarding.
// Pure logic only — no DOM — so it is unit-testable.

import type { ModelInfo, Sampler } from "./types.js";

export const ALL_SAMPLERS: Sampler[] = ["ancestral", "deterministic", "euler_ode"];
export const PLAYBACK_MS = 4000; // t: 0 -> 1

export type PlotType = "scatter" | "contour" | "both";
export type Playback = "playing" | "paused" | "scrubbing";

export function clampT(t: number): number {
  if (!Number.isFinite(t)) return 0;
  return Math.min(Math.max(t, 0), 1);
}

/** Samplers the current model supports; everything else gets disabled in
 * the menu. No model means nothing is enabled. */
export function enabledSamplers(model: ModelInfo | null): Sampler[] {
  return model ? model.samplers : [];
}

/** Keep the selection if still compatible, otherwise fall back to the
 * model's first supported sampler (null when there is no model). */
export function reconcileSampler(
  selected: Sampler | null,
  model: ModelInfo | null,
): Sampler | null {
  const enabled = enabledSamplers(model);
  if (enabled.length === 0) return null;
  return selected !== null && enabled.includes(selected) ? selected : enabled[0];
}

export class PlaybackClock {
  state: Playback = "paused";
  t = 0;
  private startedAt = 0;
  private startT = 0;

  constructor(private durationMs: number = PLAYBACK_MS) {}

  play(nowMs: number): void {
    this.startT = this.t >= 1 ? 0 : this.t; // replay from the start at the end
    this.startedAt = nowMs;
    this.state = "playing";
  }

  pause(): void {
    this.state = "paused";
  }

  scrub(t: number): void {
    this.t = clampT(t);
    this.state = "scrubbing";
  }

  /** Advance to wall-clock nowMs; returns the current t. Pauses at t=1. */
  tick(nowMs: number): number {
    if (this.state === "playing") {
      this.t = clampT(this.startT + (nowMs - this.startedAt) / this.durationMs);
      if (this.t >= 1) this.state = "paused";
    }
    return this.t;
  }
}

/** Monotone counter guarding async responses: a response is applied only
 * when no newer request has been issued for the same slot. */
export class RequestEpoch {
  private issued = 0;
  private applied = 0;

  next(): number {
    return ++this.issued;
  }

  /** True (and records it) when `epoch` is newer than anything applied. */
  accept(epoch: number): boolean {
    if (epoch <= this.applied) return false;
    this.applied = epoch;
    return true;
  }
}
