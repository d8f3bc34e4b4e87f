"""Local HTTP service: sessions, training with streamed snapshots,
sampling, and density queries.

Sessions are in-memory only and expire after 30 minutes idle. Each
session serializes its mutations under a lock; training runs on a
dedicated daemon thread that appends events to the session's event log,
which the websocket endpoint replays and then follows.
"""

import asyncio
import hashlib
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import UsageError
from .datasets import StrokeSet, builtin_dataset, strokes_to_dataset
from .density import (DEFAULT_N_LEVELS, contour_levels, density_at_time,
                      marching_squares)
from .diffusion import Objective
from .samplers import (SamplerKind, compatible_samplers, default_steps,
                       sample_trajectories)
from .store import PRETRAINED_NAMES, load_pretrained, save_model
from .training import TrainConfig, TrainingDiverged, train

SESSION_TTL_SECONDS = 30 * 60
DEFAULT_SEED = 0
DEFAULT_SAMPLE_N = 500
DEFAULT_DENSITY_N = 1000


@dataclass
class Session:
    id: str
    dataset: object = None
    model: object = None
    state: str = "idle"  # idle | running | cancelling | partial | done | failed
    created_at: float = field(default_factory=time.time)
    last_access: float = field(default_factory=time.time)
    events: list = field(default_factory=list)
    cancel_event: threading.Event = field(default_factory=threading.Event)
    thread: Optional[threading.Thread] = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    model_version: int = 0
    density_cache: dict = field(default_factory=dict)

    def install_model(self, model):
        self.model = model
        self.model_version += 1
        self.density_cache.clear()


class DatasetSpec(BaseModel):
    kind: str
    n: int = 2000
    seed: int = DEFAULT_SEED
    jitter_sigma: float = 0.02
    strokes: Optional[list] = None
    canvas: Optional[dict] = None


class TrainRequest(BaseModel):
    objective: str = "flow_matching"
    epochs: Optional[int] = None
    steps_per_epoch: Optional[int] = None
    batch_size: Optional[int] = None
    lr: Optional[float] = None
    seed: Optional[int] = None


class PretrainedRequest(BaseModel):
    name: str


class SampleRequest(BaseModel):
    kind: str
    n: int = DEFAULT_SAMPLE_N
    steps: Optional[int] = None
    seed: int = DEFAULT_SEED


def grid_payload(grid):
    return {
        "nx": grid.nx,
        "ny": grid.ny,
        "bounds": list(grid.bounds),
        "values": [list(row) for row in grid.values.T],  # row-major by y
    }


def contour_payload(contours):
    levels = []
    for level, chains in zip(contours.levels, contours.chains):
        levels.append({
            "level": level,
            "chains": [{"closed": bool(closed),
                        "points": np.asarray(verts).ravel().tolist()}
                       for verts, closed in chains],
        })
    return {"levels": levels}


def model_payload(session):
    m = session.model
    if m is None:
        return None
    return {
        "objective": m.objective.value,
        "dataset_kind": m.dataset_kind,
        "data_bounds": list(m.data_bounds),
        "partial": m.partial,
        "samplers": compatible_samplers(m.objective),
        "schedule_steps": m.sched.T if m.sched is not None else None,
    }


def create_app(webui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="difflab session service")
    sessions = {}
    registry_lock = threading.Lock()

    def sweep():
        now = time.time()
        for sid in [s for s, sess in sessions.items()
                    if now - sess.last_access > SESSION_TTL_SECONDS
                    and sess.state != "running"]:
            del sessions[sid]

    def get_session(sid) -> Session:
        with registry_lock:
            sweep()
            sess = sessions.get(sid)
            if sess is None:
                raise HTTPException(404, f"unknown session {sid}")
            sess.last_access = time.time()
            return sess

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session():
        with registry_lock:
            sweep()
            sid = secrets.token_hex(8)
            sessions[sid] = Session(id=sid)
        return {"id": sid, "state": "idle"}

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        sess = get_session(sid)
        with sess.lock:
            dataset = None
            if sess.dataset is not None:
                dataset = {"kind": sess.dataset.kind,
                           "n": len(sess.dataset.points),
                           "bounds": list(sess.dataset.bounds),
                           "points": sess.dataset.points.ravel().tolist()}
            return {"id": sid, "state": sess.state, "dataset": dataset,
                    "model": model_payload(sess)}

    @app.put("/sessions/{sid}/dataset")
    def set_dataset(sid: str, spec: DatasetSpec):
        sess = get_session(sid)
        with sess.lock:
            if sess.state == "running":
                raise HTTPException(409, "training is running")
            if spec.kind in ("three_dots", "smiley"):
                dataset = builtin_dataset(spec.kind, spec.n, spec.seed)
            elif spec.kind == "custom":
                if not spec.strokes or not spec.canvas:
                    raise HTTPException(422, "custom dataset needs strokes and canvas")
                try:
                    strokes = StrokeSet(spec.strokes,
                                        spec.canvas.get("width", 0),
                                        spec.canvas.get("height", 0))
                    dataset = strokes_to_dataset(strokes, spec.n,
                                                 spec.jitter_sigma, spec.seed)
                except (UsageError, ValueError) as exc:
                    raise HTTPException(422, f"malformed strokes: {exc}")
            else:
                raise HTTPException(422, f"unknown dataset kind {spec.kind!r}")
            sess.dataset = dataset
            sess.model = None
            sess.model_version += 1
            sess.density_cache.clear()
            if sess.state not in ("idle",):
                sess.state = "idle"
        return {"kind": dataset.kind, "n": len(dataset.points),
                "bounds": list(dataset.bounds)}

    @app.post("/sessions/{sid}/train", status_code=202)
    def start_training(sid: str, req: TrainRequest):
        sess = get_session(sid)
        with sess.lock:
            if sess.state == "running":
                raise HTTPException(409, "training already running")
            if sess.dataset is None:
                raise HTTPException(409, "no dataset in session")
            try:
                objective = Objective(req.objective)
            except ValueError:
                raise HTTPException(422, f"unknown objective {req.objective!r}")
            overrides = {k: v for k, v in
                         dict(epochs=req.epochs, steps_per_epoch=req.steps_per_epoch,
                              batch_size=req.batch_size, lr=req.lr,
                              seed=req.seed).items() if v is not None}
            config = TrainConfig(**overrides)
            sess.state = "running"
            sess.events = []
            sess.cancel_event = threading.Event()
            dataset = sess.dataset

        def on_epoch(snapshot):
            sess.events.append({
                "type": "epoch_snapshot",
                "epoch": snapshot.epoch,
                "mean_loss": snapshot.mean_loss,
                "preview": snapshot.preview.ravel().tolist(),
            })

        def run():
            try:
                model = train(dataset, objective, config, on_epoch=on_epoch,
                              cancel=sess.cancel_event)
                with sess.lock:
                    sess.install_model(model)
                    sess.state = "partial" if model.partial else "done"
                sess.events.append({"type": "training_done",
                                    "partial": model.partial})
            except TrainingDiverged as exc:
                with sess.lock:
                    sess.state = "failed"
                sess.events.append({"type": "training_failed", "reason": str(exc)})
            except Exception as exc:  # defensive: never leave a run stuck
                with sess.lock:
                    sess.state = "failed"
                sess.events.append({"type": "training_failed", "reason": repr(exc)})

        sess.thread = threading.Thread(target=run, daemon=True)
        sess.thread.start()
        return {"state": "running", "epochs": config.epochs}

    @app.post("/sessions/{sid}/train/cancel")
    def cancel_training(sid: str):
        sess = get_session(sid)
        with sess.lock:
            if sess.state != "running":
                raise HTTPException(409, "no training run to cancel")
            sess.state = "cancelling"
            sess.cancel_event.set()
        return {"state": "cancelling"}

    @app.post("/sessions/{sid}/model/pretrained")
    def install_pretrained(sid: str, req: PretrainedRequest):
        sess = get_session(sid)
        if req.name not in PRETRAINED_NAMES:
            raise HTTPException(404, f"unknown pretrained model {req.name!r}")
        model = load_pretrained(req.name)
        with sess.lock:
            if sess.state == "running":
                raise HTTPException(409, "training is running")
            sess.install_model(model)
            sess.state = "done"
        return {"model": model_payload(sess)}

    @app.post("/sessions/{sid}/sample")
    def sample(sid: str, req: SampleRequest):
        sess = get_session(sid)
        with sess.lock:
            model = sess.model
        if model is None:
            raise HTTPException(409, "no model in session")
        try:
            kind = SamplerKind(req.kind)
        except ValueError:
            raise HTTPException(422, f"unknown sampler {req.kind!r}")
        if kind.value not in compatible_samplers(model.objective):
            raise HTTPException(422, f"sampler {req.kind!r} incompatible with model")
        steps = req.steps if req.steps is not None else default_steps(model, kind)
        rng = np.random.default_rng(req.seed)
        try:
            trajs = sample_trajectories(model, kind, req.n, steps, rng)
        except UsageError as exc:
            raise HTTPException(422, str(exc))
        return {
            "times": trajs[0].times.tolist(),
            "trajectories": [tr.positions.ravel().tolist() for tr in trajs],
            "data_bounds": list(model.data_bounds),
        }

    @app.get("/sessions/{sid}/density")
    def density(sid: str, t: float, n: int = DEFAULT_DENSITY_N,
                seed: int = DEFAULT_SEED, kind: Optional[str] = None):
        sess = get_session(sid)
        with sess.lock:
            model = sess.model
            version = sess.model_version
        if model is None:
            raise HTTPException(409, "no model in session")
        if not 0.0 <= t <= 1.0:
            raise HTTPException(422, f"t must be in [0, 1], got {t}")
        if kind is None:
            kind = compatible_samplers(model.objective)[-1]
        try:
            sampler = SamplerKind(kind)
        except ValueError:
            raise HTTPException(422, f"unknown sampler {kind!r}")
        if sampler.value not in compatible_samplers(model.objective):
            raise HTTPException(422, f"sampler {kind!r} incompatible with model")
        key = (version, sampler.value, round(t, 9), n, seed)
        cached = sess.density_cache.get(key)
        if cached is None:
            rng = np.random.default_rng(seed)
            grid = density_at_time(model, sampler, t, n, rng)
            contours = marching_squares(grid, contour_levels(grid, DEFAULT_N_LEVELS))
            body = JSONResponse({
                "grid": grid_payload(grid),
                "contours": contour_payload(contours),
                "t": t,
            }).body
            cached = bytes(body)
            sess.density_cache[key] = cached
        return Response(content=cached, media_type="application/json")

    @app.get("/sessions/{sid}/model/export")
    def export_model(sid: str):
        sess = get_session(sid)
        with sess.lock:
            model = sess.model
        if model is None:
            raise HTTPException(409, "no model in session")
        return Response(content=save_model(model), media_type="application/json")

    @app.websocket("/sessions/{sid}/events")
    async def events(ws: WebSocket, sid: str):
        await ws.accept()
        with registry_lock:
            sess = sessions.get(sid)
        if sess is None:
            await ws.close(code=4404)
            return
        sent = 0
        try:
            while True:
                events = sess.events
                while sent < len(events):
                    await ws.send_json(events[sent])
                    if events[sent]["type"] in ("training_done", "training_failed"):
                        await ws.close()
                        return
                    sent += 1
                await asyncio.sleep(0.05)
        except WebSocketDisconnect:
            pass

    webui = webui_dir or os.environ.get("DIFFLAB_WEBUI_DIR")
    if webui is None:
        bundled = os.path.join(os.path.dirname(__file__), "webui")
        if os.path.isdir(bundled):
            webui = bundled
    if webui and os.path.isdir(webui):
        app.mount("/", StaticFiles(directory=webui, html=True), name="webui")
    else:
        @app.get("/")
        def index():
            return {"service": "difflab", "webui": "not bundled"}

    return app


app = create_app()
