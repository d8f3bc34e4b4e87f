// Wire types for the difflab session service.

export type Objective = "noise_prediction" | "flow_matching";
export type Sampler = "ancestral" | "deterministic" | "euler_ode";
export type DatasetKind = "three_dots" | "smiley" | "custom";

export interface ModelInfo {
  objective: Objective;
  dataset_kind: string;
  data_bounds: [number, number, number, number];
  partial: boolean;
  samplers: Sampler[];
  schedule_steps: number | null;
}

export interface SessionState {
  id: string;
  state: string;
  dataset: {
    kind: string;
    n: number;
    bounds: [number, number, number, number];
    points: number[]; // flat [x0, y0, x1, y1, ...]
  } | null;
  model: ModelInfo | null;
}

export interface SampleResponse {
  times: number[]; // ascending, times[0] = 0 (noise), last = 1 (data)
  trajectories: number[][]; // one flat [x0, y0, x1, y1, ...] per sample
  data_bounds: [number, number, number, number];
}

export interface ContourChain {
  closed: boolean;
  points: number[]; // flat vertex list
}

export interface DensityResponse {
  grid: {
    nx: number;
    ny: number;
    bounds: [number, number, number, number];
    values: number[][]; // values[j][i] = density at (xs[i], ys[j])
  };
  contours: { levels: { level: number; chains: ContourChain[] }[] };
  t: number;
}

export type TrainEvent =
  | { type: "epoch_snapshot"; epoch: number; mean_loss: number; preview: number[] }
  | { type: "training_done"; partial: boolean }
  | { type: "training_failed"; reason: string };

export interface DatasetSpec {
  kind: DatasetKind;
  n?: number;
  seed?: number;
  jitter_sigma?: number;
  strokes?: number[][][];
  canvas?: { width: number; height: number };
}

export interface TrainRequest {
  objective: Objective;
  epochs?: number;
  steps_per_epoch?: number;
  batch_size?: number;
  lr?: number;
  seed?: number;
}
