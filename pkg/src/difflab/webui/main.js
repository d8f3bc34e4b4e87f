// Application wiring: control bar, diffusion view, time bar, drawing
// canvas, and live training panel, all talking to the session service.
import { DiffLabClient, ApiError } from "./api.js";
import { RateLimiter } from "./debounce.js";
import { positionsAtTime, selectSourceIndices, trajectoryPath } from "./interp.js";
import { drawPoints, drawScatter, drawSparkline, renderContours, renderPathTraces, toWorld, } from "./render.js";
import { ALL_SAMPLERS, PlaybackClock, RequestEpoch, clampT, reconcileSampler, } from "./state.js";
import { StrokeRecorder } from "./strokes.js";
const VIEW_SIZE = 520;
const SAMPLE_N = 600;
const DENSITY_N = 1500;
const MODEL_BOUNDS = [-1.6, 1.6, -1.6, 1.6];
function $(id) {
    const el = document.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
}
class App {
    constructor() {
        this.client = new DiffLabClient();
        this.sessionId = "";
        this.objective = "flow_matching";
        this.sampler = null;
        this.datasetKind = "three_dots";
        this.plotType = "scatter";
        this.seed = Math.floor(Math.random() * 1000000);
        this.model = null;
        this.sample = null;
        this.density = null;
        this.selected = new Set();
        this.losses = [];
        this.previewPoints = null;
        this.datasetPoints = null;
        this.clock = new PlaybackClock();
        this.densityEpoch = new RequestEpoch();
        this.sampleEpoch = new RequestEpoch();
        this.densityLimiter = new RateLimiter((t) => void this.fetchDensity(t), 100);
        this.recorder = new StrokeRecorder(VIEW_SIZE, VIEW_SIZE);
        this.drawingMode = false;
        this.closeEvents = null;
        this.scatterCtx = ($("scatter")).getContext("2d");
        this.overlay = document.getElementById("overlay");
        this.sparkCtx = ($("sparkline")).getContext("2d");
    }
    get viewport() {
        const bounds = this.sample?.data_bounds ?? this.model?.data_bounds ?? MODEL_BOUNDS;
        return { width: VIEW_SIZE, height: VIEW_SIZE, bounds };
    }
    // density grids live in normalized model space regardless of dataset
    get densityViewport() {
        return { width: VIEW_SIZE, height: VIEW_SIZE, bounds: this.density?.grid.bounds ?? MODEL_BOUNDS };
    }
    async init() {
        this.sessionId = await this.client.createSession();
        this.bindControls();
        await this.applyDataset();
        requestAnimationFrame((ts) => this.frame(ts));
    }
    status(text) {
        $("status").textContent = text;
    }
    bindControls() {
        const objectiveSel = $("objective");
        objectiveSel.onchange = () => {
            this.objective = objectiveSel.value;
        };
        const samplerSel = $("sampler");
        samplerSel.onchange = () => {
            this.sampler = samplerSel.value;
            void this.refreshSample();
        };
        const datasetSel = $("dataset");
        datasetSel.onchange = () => {
            this.datasetKind = datasetSel.value;
            this.drawingMode = this.datasetKind === "custom";
            $("draw-tools").classList.toggle("hidden", !this.drawingMode);
            if (!this.drawingMode)
                void this.applyDataset();
            else
                this.status("draw strokes, then press Use drawing");
        };
        const plotSel = $("plot-type");
        plotSel.onchange = () => {
            this.plotType = plotSel.value;
            if (this.plotType !== "scatter")
                this.densityLimiter.schedule(this.clock.t);
        };
        $("reseed").onclick = () => {
            this.seed = Math.floor(Math.random() * 1000000);
            $("seed-label").textContent = `seed ${this.seed}`;
            void this.refreshSample();
        };
        $("seed-label").textContent = `seed ${this.seed}`;
        $("train").onclick = () => void this.startTraining();
        $("cancel").onclick = () => void this.client.cancelTraining(this.sessionId).catch(() => { });
        $("pretrained").onclick = () => void this.loadPretrained();
        $("use-drawing").onclick = () => void this.applyDataset();
        $("undo-stroke").onclick = () => this.recorder.undo();
        $("clear-strokes").onclick = () => this.recorder.clear();
        const timeBar = $("time");
        timeBar.oninput = () => {
            this.clock.scrub(Number(timeBar.value));
            if (this.plotType !== "scatter")
                this.densityLimiter.schedule(this.clock.t);
        };
        $("play").onclick = () => this.clock.play(performance.now());
        $("pause").onclick = () => this.clock.pause();
        const canvas = $("scatter");
        canvas.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
        canvas.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
        canvas.addEventListener("pointerup", () => this.onPointerUp());
        canvas.addEventListener("pointerleave", () => this.onPointerUp());
    }
    canvasPos(ev) {
        const rect = ($("scatter")).getBoundingClientRect();
        return [ev.clientX - rect.left, ev.clientY - rect.top];
    }
    onPointerDown(ev) {
        const [px, py] = this.canvasPos(ev);
        if (this.drawingMode) {
            this.recorder.beginStroke(px, py);
            return;
        }
        if (!this.sample)
            return;
        const [x, y] = toWorld(this.viewport, px, py);
        const [xmin, xmax] = this.viewport.bounds;
        this.selected = new Set(selectSourceIndices(this.sample, x, y, 0.06 * (xmax - xmin)));
    }
    onPointerMove(ev) {
        if (this.drawingMode && this.recorder.drawing) {
            const [px, py] = this.canvasPos(ev);
            this.recorder.addPoint(px, py);
        }
    }
    onPointerUp() {
        if (this.drawingMode)
            this.recorder.endStroke();
    }
    async applyDataset() {
        try {
            if (this.drawingMode) {
                if (this.recorder.strokes.length === 0)
                    return;
                await this.client.setDataset(this.sessionId, this.recorder.toDatasetSpec(2000, this.seed));
            }
            else {
                await this.client.setDataset(this.sessionId, {
                    kind: this.datasetKind,
                    n: 2000,
                    seed: this.seed,
                });
            }
            const state = await this.client.getState(this.sessionId);
            this.datasetPoints = state.dataset?.points ?? null;
            this.setModel(null);
            this.status(`dataset: ${this.datasetKind}`);
        }
        catch (err) {
            this.status(err instanceof ApiError ? err.message : String(err));
        }
    }
    setModel(model) {
        this.model = model;
        this.sample = null;
        this.density = null;
        this.selected.clear();
        this.sampler = reconcileSampler(this.sampler, model);
        const samplerSel = $("sampler");
        samplerSel.innerHTML = "";
        for (const s of ALL_SAMPLERS) {
            const opt = document.createElement("option");
            opt.value = s;
            opt.textContent = s;
            opt.disabled = !model || !model.samplers.includes(s);
            opt.selected = s === this.sampler;
            samplerSel.appendChild(opt);
        }
        renderContours(this.overlay, this.densityViewport, null);
        renderPathTraces(this.overlay, this.viewport, [], 0);
    }
    async startTraining() {
        this.losses = [];
        this.previewPoints = null;
        this.closeEvents?.();
        try {
            await this.client.startTraining(this.sessionId, { objective: this.objective });
        }
        catch (err) {
            this.status(err instanceof ApiError ? err.message : String(err));
            return;
        }
        this.status("training…");
        this.closeEvents = this.client.trainingEvents(this.sessionId, (ev) => this.onTrainEvent(ev));
    }
    onTrainEvent(ev) {
        if (ev.type === "epoch_snapshot") {
            this.losses.push(ev.mean_loss);
            this.previewPoints = ev.preview;
            this.status(`epoch ${ev.epoch}  loss ${ev.mean_loss.toExponential(3)}`);
            drawSparkline(this.sparkCtx, this.losses);
            return;
        }
        this.previewPoints = null;
        if (ev.type === "training_failed") {
            this.status(`training failed: ${ev.reason}`);
            return;
        }
        this.status(ev.partial ? "training cancelled (partial model)" : "training done");
        void this.onModelReady();
    }
    async loadPretrained() {
        const name = `${this.datasetKind === "smiley" ? "smiley" : "three_dots"}_${this.objective === "flow_matching" ? "flow" : "noise"}`;
        try {
            await this.client.loadPretrained(this.sessionId, name);
            this.status(`loaded pretrained ${name}`);
            await this.onModelReady();
        }
        catch (err) {
            this.status(err instanceof ApiError ? err.message : String(err));
        }
    }
    async onModelReady() {
        const state = await this.client.getState(this.sessionId);
        this.setModel(state.model);
        await this.refreshSample();
    }
    async refreshSample() {
        if (!this.model || !this.sampler)
            return;
        const epoch = this.sampleEpoch.next();
        try {
            const sample = await this.client.sample(this.sessionId, this.sampler, SAMPLE_N, null, this.seed);
            if (!this.sampleEpoch.accept(epoch))
                return; // a newer request superseded this one
            this.sample = sample;
            this.selected.clear();
            if (this.plotType !== "scatter")
                this.densityLimiter.schedule(this.clock.t);
        }
        catch (err) {
            this.status(err instanceof ApiError ? err.message : String(err));
        }
    }
    async fetchDensity(t) {
        if (!this.model || !this.sampler)
            return;
        const epoch = this.densityEpoch.next();
        try {
            const density = await this.client.density(this.sessionId, clampT(t), DENSITY_N, this.seed, this.sampler);
            if (!this.densityEpoch.accept(epoch))
                return;
            this.density = density;
            renderContours(this.overlay, this.densityViewport, this.plotType === "scatter" ? null : density);
        }
        catch {
            // transient: e.g. the model was just replaced
        }
    }
    frame(nowMs) {
        const wasPlaying = this.clock.state === "playing";
        const t = this.clock.tick(nowMs);
        const timeBar = $("time");
        if (this.clock.state !== "scrubbing")
            timeBar.value = String(t);
        $("time-label").textContent = `t = ${t.toFixed(2)}`;
        if (wasPlaying && this.plotType !== "scatter")
            this.densityLimiter.schedule(t);
        const ctx = this.scatterCtx;
        ctx.clearRect(0, 0, VIEW_SIZE, VIEW_SIZE);
        if (this.drawingMode) {
            this.drawStrokes(ctx);
        }
        else if (this.previewPoints) {
            drawPoints(ctx, { width: VIEW_SIZE, height: VIEW_SIZE, bounds: MODEL_BOUNDS }, this.previewPoints, "#2a7a2a");
        }
        else if (this.sample && this.plotType !== "contour") {
            if (this.datasetPoints) {
                drawPoints(ctx, this.viewport, this.datasetPoints, "rgba(160,160,160,0.25)", 1);
            }
            const frame = positionsAtTime(this.sample, t);
            drawScatter(ctx, this.viewport, frame, "#1f5fbf", 2, this.selected);
            if (this.selected.size > 0) {
                const paths = [...this.selected].map((i) => trajectoryPath(this.sample, i));
                renderPathTraces(this.overlay, this.viewport, paths, t);
            }
            else {
                renderPathTraces(this.overlay, this.viewport, [], 0);
            }
        }
        else if (this.datasetPoints) {
            drawPoints(ctx, this.viewport, this.datasetPoints, "rgba(120,120,120,0.5)", 1.5);
        }
        requestAnimationFrame((ts) => this.frame(ts));
    }
    drawStrokes(ctx) {
        ctx.strokeStyle = "#333";
        ctx.lineWidth = 2;
        ctx.lineJoin = "round";
        for (const stroke of this.recorder.allStrokes()) {
            if (stroke.length === 0)
                continue;
            ctx.beginPath();
            ctx.moveTo(stroke[0][0], stroke[0][1]);
            for (const [x, y] of stroke.slice(1))
                ctx.lineTo(x, y);
            if (stroke.length === 1)
                ctx.lineTo(stroke[0][0] + 0.5, stroke[0][1]);
            ctx.stroke();
        }
    }
}
new App().init().catch((err) => {
    document.body.textContent = `failed to start: ${err}`;
});
