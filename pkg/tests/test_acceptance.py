"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`."""

import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from difflab.datasets import gen_three_dots, three_dots_centers
from difflab.density import contour_levels, kde, marching_squares, shoelace_area
from difflab.diffusion import forward_noise, linear_schedule
from difflab.nn import MlpConfig, mlp_backward, mlp_forward, mlp_init
from difflab.samplers import (run_deterministic, run_euler, sample_source,
                              sample_trajectories)
from difflab.service import create_app
from difflab.store import load_model, save_model
from difflab.training import TrainConfig, train

MU = np.array([0.5, -0.3])
SIGMA = 0.2


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_criterion_1_gradient_oracle():
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    worst = 0.0
    for case in range(20):
        hidden = tuple(rng.integers(3, 12, size=rng.integers(1, 3)))
        cfg = MlpConfig(int(rng.integers(2, 6)), hidden, int(rng.integers(1, 4)),
                        activation=("relu", "silu")[case % 2], time_embed_dim=2)
        p = mlp_init(cfg, seed=case)
        x = rng.standard_normal((3, cfg.input_dim))
        out_grad = rng.standard_normal((3, cfg.output_dim))
        _, cache = mlp_forward(p, x)
        analytic = mlp_backward(p, cache, out_grad)

        def objective():
            out, _ = mlp_forward(p, x)
            return float((out * out_grad).sum())

        h = 1e-5
        for tensor, ana in zip(p.weights + p.biases,
                               analytic.weights + analytic.biases):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + h
                hi = objective()
                tensor[idx] = orig - h
                lo = objective()
                tensor[idx] = orig
                num = (hi - lo) / (2 * h)
                a = ana[idx]
                rel = abs(a - num) / max(abs(a) + abs(num), 1e-8)
                worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    report("criterion 1: gradient oracle", worst < 1e-5 and elapsed < 5.0,
           f"max rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_forward_marginal():
    start = time.perf_counter()
    sched = linear_schedule()
    x0 = np.array([0.3, -0.7])
    N = 100_000
    ok = True
    details = []
    for k in (1, sched.T // 2, sched.T):
        rng = np.random.default_rng(k)
        out = forward_noise(x0, k, rng.standard_normal((N, 2)), sched)
        ab = sched.alpha_bar[k - 1]
        mean_tol = 4.0 * np.sqrt((1.0 - ab) / N)
        mean_err = np.abs(out.mean(axis=0) - np.sqrt(ab) * x0).max()
        var_rel = np.abs(out.var(axis=0) / (1.0 - ab) - 1.0).max()
        ok = ok and mean_err < mean_tol and var_rel < 0.02
        details.append(f"k={k}: mean {mean_err:.4f}<{mean_tol:.4f}, var {var_rel:.3%}")
    elapsed = time.perf_counter() - start
    report("criterion 2: forward marginal", ok and elapsed < 5.0,
           "; ".join(details) + f", {elapsed:.2f}s")


def analytic_eps(sched):
    def eps_fn(x, k):
        ab = sched.alpha_bar[k - 1]
        return np.sqrt(1 - ab) * (x - np.sqrt(ab) * MU) / (ab * SIGMA ** 2 + 1 - ab)
    return eps_fn


def analytic_velocity(x, s):
    gam2 = (1 - s) ** 2 + s ** 2 * SIGMA ** 2
    return MU + (s * SIGMA ** 2 - (1 - s)) * (x - s * MU) / gam2


def test_criterion_3_analytic_gaussian_transport():
    start = time.perf_counter()
    sched = linear_schedule(200, 1e-4, 0.1)
    x = sample_source(10_000, np.random.default_rng(1))
    det_end = run_deterministic(analytic_eps(sched), x, sched, 200)[-1]
    x = sample_source(10_000, np.random.default_rng(2))
    ode_end = run_euler(analytic_velocity, x, 200)[-1]
    ok = True
    details = []
    for name, end in (("deterministic", det_end), ("euler_ode", ode_end)):
        mean_err = np.abs(end.mean(axis=0) - MU).max()
        std_rel = np.abs(end.std(axis=0) / SIGMA - 1.0).max()
        ok = ok and mean_err < 0.01 and std_rel < 0.05
        details.append(f"{name}: mean {mean_err:.4f}, std {std_rel:.3%}")
    elapsed = time.perf_counter() - start
    report("criterion 3: analytic Gaussian transport", ok and elapsed < 10.0,
           "; ".join(details) + f", {elapsed:.2f}s")


def test_criterion_4_euler_order():
    z = sample_source(2000, np.random.default_rng(3))
    exact = MU + SIGMA * z
    errs = []
    for steps in (10, 20, 40):
        end = run_euler(analytic_velocity, z, steps)[-1]
        errs.append(np.abs(end - exact).max())
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(1.7 <= r <= 2.3 for r in ratios)
    report("criterion 4: Euler first-order convergence", ok,
           f"ratios {ratios[0]:.2f}, {ratios[1]:.2f}")


def test_criterion_5_training_quality_gate():
    centers = three_dots_centers()
    dataset = gen_three_dots(2000, 0)
    true = gen_three_dots(2000, 999).points

    def mean_cross(a, b):
        return np.mean(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2))

    # noise floor: energy distance between two independent true draws
    other = gen_three_dots(2000, 998).points
    floor = (2 * mean_cross(other, true) - mean_cross(other, other)
             - mean_cross(true, true))

    ok = True
    details = [f"noise floor {floor:.4f}"]
    for seed in (0, 1, 2):
        t0 = time.perf_counter()
        model = train(dataset, "flow_matching", TrainConfig(seed=seed))
        wall = time.perf_counter() - t0
        trajs = sample_trajectories(model, "euler_ode", 2000, 50,
                                    np.random.default_rng(123))
        pts = np.stack([t.positions[-1] for t in trajs])
        d = np.linalg.norm(pts[:, None, :] - centers[None], axis=2).min(axis=1)
        frac = float((d < 0.3).mean())
        energy = (2 * mean_cross(pts, true) - mean_cross(pts, pts)
                  - mean_cross(true, true))
        ok = ok and wall <= 15.0 and frac >= 0.9 and energy < 0.05
        details.append(f"seed {seed}: {wall:.1f}s, frac {frac:.3f}, energy {energy:.4f}")
    report("criterion 5: end-to-end training quality gate", ok,
           "; ".join(details))


def test_criterion_6_kde_and_contour():
    rng = np.random.default_rng(4)
    pts = 0.3 * rng.standard_normal((2000, 2))
    from difflab.density import silverman_bandwidth
    h = silverman_bandwidth(pts)
    reach = float(np.abs(pts).max() + 4 * h)
    grid = kde(pts, nx=96, ny=96, bounds=(-reach, reach, -reach, reach), h=h)
    cw, ch = grid.cell_size
    mass = grid.values.sum() * cw * ch

    hk = 0.15
    point_grid = kde(np.array([[0.0, 0.0]]), nx=128, ny=128,
                     bounds=(-1, 1, -1, 1), h=hk)
    peak = 1.0 / (2 * np.pi * hk * hk)
    level = peak / np.e
    chains = marching_squares(point_grid, [level]).chains[0]
    r = hk * np.sqrt(2.0)
    area_ok = (len(chains) == 1 and chains[0][1]
               and abs(shoelace_area(chains[0][0]) - np.pi * r * r) / (np.pi * r * r) < 0.03)
    ok = (0.95 <= mass <= 1.0) and area_ok
    report("criterion 6: KDE mass and contour area", ok,
           f"mass {mass:.4f}, chains {len(chains)}")


def test_criterion_7_persistence():
    dataset = gen_three_dots(500, 0)
    model = train(dataset, "noise_prediction",
                  TrainConfig(epochs=3, steps_per_epoch=10, batch_size=64, seed=5))
    b1 = save_model(model)
    b2 = save_model(model)
    loaded = load_model(b1)
    a = sample_trajectories(model, "deterministic", 50, 50,
                            np.random.default_rng(6))
    b = sample_trajectories(loaded, "deterministic", 50, 50,
                            np.random.default_rng(6))
    dev = max(np.abs(x.positions - y.positions).max() for x, y in zip(a, b))
    ok = (b1 == b2) and dev <= 1e-5 and save_model(loaded) == save_model(load_model(save_model(loaded)))
    report("criterion 7: persistence round trip", ok,
           f"deviation {dev:.2e}, byte-stable {b1 == b2}")


def test_criterion_8_service_integration():
    strokes = {
        "kind": "custom",
        "n": 600,
        "strokes": [[[20, 20], [80, 20], [80, 80], [20, 80], [20, 20]]],
        "canvas": {"width": 100, "height": 100},
    }
    with TestClient(create_app(webui_dir=None)) as client:
        sid = client.post("/sessions").json()["id"]
        r = client.put(f"/sessions/{sid}/dataset", json=strokes)
        assert r.status_code == 200 and r.json()["kind"] == "custom"
        r = client.post(f"/sessions/{sid}/train",
                        json={"objective": "flow_matching", "epochs": 4,
                              "steps_per_epoch": 5, "batch_size": 64})
        assert r.status_code == 202
        events = []
        with client.websocket_connect(f"/sessions/{sid}/events") as ws:
            while True:
                msg = ws.receive_json()
                events.append(msg)
                if msg["type"] in ("training_done", "training_failed"):
                    break
        epochs = [e["epoch"] for e in events if e["type"] == "epoch_snapshot"]
        terminal = [e for e in events if e["type"] in ("training_done",
                                                       "training_failed")]
        snapshots_ok = epochs == [1, 2, 3, 4]
        terminal_ok = len(terminal) == 1 and terminal[0]["type"] == "training_done"
        for e in events[:-1]:
            assert set(e) == {"type", "epoch", "mean_loss", "preview"}
            assert len(e["preview"]) == 800  # 400 points x 2 coords

        r = client.post(f"/sessions/{sid}/sample",
                        json={"kind": "euler_ode", "n": 50, "steps": 20,
                              "seed": 1})
        body = r.json()
        sample_ok = (r.status_code == 200 and len(body["trajectories"]) == 50
                     and len(body["times"]) == 21
                     and all(len(t) == 42 for t in body["trajectories"]))

        r = client.get(f"/sessions/{sid}/density?t=0.5&n=300&seed=2")
        dens = r.json()
        density_ok = (r.status_code == 200
                      and dens["grid"]["nx"] == 64
                      and len(dens["contours"]["levels"]) >= 1)
        ok = snapshots_ok and terminal_ok and sample_ok and density_ok
    report("criterion 8: service integration", ok,
           f"epochs {epochs}, terminal {len(terminal)}")
