// Thin fetch/WebSocket client for the session service. All methods throw
// ApiError with the server's status and detail on non-2xx responses.

import type {
  DatasetSpec,
  DensityResponse,
  SampleResponse,
  Sampler,
  SessionState,
  TrainEvent,
  TrainRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class DiffLabClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  async createSession(): Promise<string> {
    const body = await asJson<{ id: string }>(
      await fetch(this.url("/sessions"), { method: "POST" }),
    );
    return body.id;
  }

  getState(sid: string): Promise<SessionState> {
    return fetch(this.url(`/sessions/${sid}`)).then((r) => asJson(r));
  }

  async setDataset(sid: string, spec: DatasetSpec) {
    return asJson<{ kind: string; n: number; bounds: number[] }>(
      await fetch(this.url(`/sessions/${sid}/dataset`), {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(spec),
      }),
    );
  }

  async startTraining(sid: string, req: TrainRequest) {
    return asJson<{ state: string; epochs: number }>(
      await fetch(this.url(`/sessions/${sid}/train`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(req),
      }),
    );
  }

  async cancelTraining(sid: string) {
    return asJson<{ state: string }>(
      await fetch(this.url(`/sessions/${sid}/train/cancel`), { method: "POST" }),
    );
  }

  async loadPretrained(sid: string, name: string) {
    return asJson<{ model: unknown }>(
      await fetch(this.url(`/sessions/${sid}/model/pretrained`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ name }),
      }),
    );
  }

  async sample(
    sid: string,
    kind: Sampler,
    n: number,
    steps: number | null,
    seed: number,
  ): Promise<SampleResponse> {
    return asJson<SampleResponse>(
      await fetch(this.url(`/sessions/${sid}/sample`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ kind, n, steps, seed }),
      }),
    );
  }

  async density(
    sid: string,
    t: number,
    n: number,
    seed: number,
    kind?: Sampler,
  ): Promise<DensityResponse> {
    const params = new URLSearchParams({
      t: String(t),
      n: String(n),
      seed: String(seed),
    });
    if (kind) params.set("kind", kind);
    return asJson<DensityResponse>(
      await fetch(this.url(`/sessions/${sid}/density?${params}`)),
    );
  }

  /** Open the training event stream; onEvent fires per message until the
   * terminal event, after which the server closes the socket. Returns a
   * close function for early teardown. */
  trainingEvents(
    sid: string,
    onEvent: (ev: TrainEvent) => void,
    onClose?: () => void,
  ): () => void {
    const scheme = location.protocol === "https:" ? "wss:" : "ws:";
    const ws = new WebSocket(`${scheme}//${location.host}/sessions/${sid}/events`);
    ws.onmessage = (msg) => onEvent(JSON.parse(msg.data) as TrainEvent);
    if (onClose) ws.onclose = () => onClose();
    return () => ws.close();
  }

  exportUrl(sid: string): string {
    return this.url(`/sessions/${sid}/model/export`);
  }
}
