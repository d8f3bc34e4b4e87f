// Thin fetch/WebSocket client for the session service. All methods throw
// ApiError with the server's status and detail on non-2xx responses.
export class ApiError extends Error {
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
    }
}
async function asJson(resp) {
    if (!resp.ok) {
        let detail = resp.statusText;
        try {
            const body = await resp.json();
            if (body && typeof body.detail === "string")
                detail = body.detail;
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(resp.status, detail);
    }
    return resp.json();
}
export class DiffLabClient {
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    url(path) {
        return this.baseUrl + path;
    }
    async createSession() {
        const body = await asJson(await fetch(this.url("/sessions"), { method: "POST" }));
        return body.id;
    }
    getState(sid) {
        return fetch(this.url(`/sessions/${sid}`)).then((r) => asJson(r));
    }
    async setDataset(sid, spec) {
        return asJson(await fetch(this.url(`/sessions/${sid}/dataset`), {
            method: "PUT",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(spec),
        }));
    }
    async startTraining(sid, req) {
        return asJson(await fetch(this.url(`/sessions/${sid}/train`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(req),
        }));
    }
    async cancelTraining(sid) {
        return asJson(await fetch(this.url(`/sessions/${sid}/train/cancel`), { method: "POST" }));
    }
    async loadPretrained(sid, name) {
        return asJson(await fetch(this.url(`/sessions/${sid}/model/pretrained`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ name }),
        }));
    }
    async sample(sid, kind, n, steps, seed) {
        return asJson(await fetch(this.url(`/sessions/${sid}/sample`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ kind, n, steps, seed }),
        }));
    }
    async density(sid, t, n, seed, kind) {
        const params = new URLSearchParams({
            t: String(t),
            n: String(n),
            seed: String(seed),
        });
        if (kind)
            params.set("kind", kind);
        return asJson(await fetch(this.url(`/sessions/${sid}/density?${params}`)));
    }
    /** Open the training event stream; onEvent fires per message until the
     * terminal event, after which the server closes the socket. Returns a
     * close function for early teardown. */
    trainingEvents(sid, onEvent, onClose) {
        const scheme = location.protocol === "https:" ? "wss:" : "ws:";
        const ws = new WebSocket(`${scheme}//${location.host}/sessions/${sid}/events`);
        ws.onmessage = (msg) => onEvent(JSON.parse(msg.data));
        if (onClose)
            ws.onclose = () => onClose();
        return () => ws.close();
    }
    exportUrl(sid) {
        return this.url(`/sessions/${sid}/model/export`);
    }
}
