// Client-side trajectory interpolation: scrubbing reads the cached
// trajectory grid instead of hitting the service. Semantics match the
// engine: uniform time grid, linear interpolation between frames, exact
// frames at grid points, and clamping outside [0, 1].

import type { SampleResponse } from "./types.js";

export interface Frame {
  xs: Float64Array;
  ys: Float64Array;
  clamped: boolean;
}

/** Positions of every trajectory at UI time t (0 = noise, 1 = data). */
export function positionsAtTime(sample: SampleResponse, t: number): Frame {
  const n = sample.trajectories.length;
  if (n === 0) throw new Error("need at least one trajectory");
  const S = sample.times.length - 1;
  const clamped = t < 0 || t > 1;
  const tc = Math.min(Math.max(t, 0), 1);
  const xs = new Float64Array(n);
  const ys = new Float64Array(n);
  const f = tc * S;
  const lo = Math.floor(f);
  if (lo >= S) {
    for (let i = 0; i < n; i++) {
      const tr = sample.trajectories[i];
      xs[i] = tr[2 * S];
      ys[i] = tr[2 * S + 1];
    }
    return { xs, ys, clamped };
  }
  const w = f - lo;
  for (let i = 0; i < n; i++) {
    const tr = sample.trajectories[i];
    xs[i] = (1 - w) * tr[2 * lo] + w * tr[2 * lo + 2];
    ys[i] = (1 - w) * tr[2 * lo + 1] + w * tr[2 * lo + 3];
  }
  return { xs, ys, clamped };
}

/** One trajectory as [x, y] pairs, for path traces of selected points. */
export function trajectoryPath(sample: SampleResponse, index: number): [number, number][] {
  const tr = sample.trajectories[index];
  const out: [number, number][] = [];
  for (let k = 0; k < tr.length; k += 2) out.push([tr[k], tr[k + 1]]);
  return out;
}

/** Indices of trajectories whose source frame (t=0) lies within radius of
 * (x, y) — used for click-selecting a source region. */
export function selectSourceIndices(
  sample: SampleResponse,
  x: number,
  y: number,
  radius: number,
): number[] {
  const out: number[] = [];
  const r2 = radius * radius;
  for (let i = 0; i < sample.trajectories.length; i++) {
    const tr = sample.trajectories[i];
    const dx = tr[0] - x;
    const dy = tr[1] - y;
    if (dx * dx + dy * dy <= r2) out.push(i);
  }
  return out;
}
