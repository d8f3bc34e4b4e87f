// Freehand stroke capture: pointer paths downsampled to a minimum spacing
// (2 px), with undo-last-stroke and clear. Emits the service's custom
// dataset payload.

import type { DatasetSpec } from "./types.js";

export const MIN_SPACING_PX = 2;

export class StrokeRecorder {
  strokes: number[][][] = [];
  private current: number[][] | null = null;

  constructor(
    readonly width: number,
    readonly height: number,
    private minSpacing: number = MIN_SPACING_PX,
  ) {}

  get drawing(): boolean {
    return this.current !== null;
  }

  beginStroke(x: number, y: number): void {
    this.current = [[x, y]];
  }

  /** Append a pointer sample; dropped if closer than minSpacing to the
   * previous kept point. Returns true when the point was kept. */
  addPoint(x: number, y: number): boolean {
    if (!this.current) return false;
    const last = this.current[this.current.length - 1];
    const dx = x - last[0];
    const dy = y - last[1];
    if (Math.hypot(dx, dy) < this.minSpacing) return false;
    this.current.push([x, y]);
    return true;
  }

  endStroke(): void {
    if (!this.current) return;
    this.strokes.push(this.current);
    this.current = null;
  }

  undo(): void {
    if (this.current) {
      this.current = null;
      return;
    }
    this.strokes.pop();
  }

  clear(): void {
    this.strokes = [];
    this.current = null;
  }

  get empty(): boolean {
    return this.strokes.length === 0 && this.current === null;
  }

  /** Finished strokes plus the in-progress one, for live preview. */
  allStrokes(): number[][][] {
    return this.current ? [...this.strokes, this.current] : this.strokes;
  }

  toDatasetSpec(n: number, seed: number): DatasetSpec {
    if (this.strokes.length === 0) throw new Error("no strokes to submit");
    return {
      kind: "custom",
      n,
      seed,
      strokes: this.strokes,
      canvas: { width: this.width, height: this.height },
    };
  }
}
