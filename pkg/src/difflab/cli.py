"""Headless command-line driver.

Exit codes: 0 success, 2 usage error, 3 runtime failure. Every command is
deterministic given its flags, seeds included.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import UsageError
from .datasets import StrokeSet, builtin_dataset, strokes_to_dataset
from .density import (DEFAULT_N_LEVELS, contour_levels, density_at_time,
                      marching_squares)
from .diffusion import Objective
from .samplers import SamplerKind, default_steps, sample_trajectories
from .store import load_model_file, save_model
from .training import TrainConfig, TrainingDiverged, train

PRETRAINED_RECIPES = {
    # name -> (dataset kind, dataset n, dataset seed, objective, train seed)
    "three_dots_flow": ("three_dots", 2000, 0, Objective.FLOW_MATCHING, 0),
    "three_dots_noise": ("three_dots", 2000, 0, Objective.NOISE_PREDICTION, 0),
    "smiley_flow": ("smiley", 4000, 0, Objective.FLOW_MATCHING, 0),
    "smiley_noise": ("smiley", 4000, 0, Objective.NOISE_PREDICTION, 0),
}


def _load_dataset_arg(name, n, seed):
    if name in ("three_dots", "smiley"):
        return builtin_dataset(name, n, seed), {"kind": name, "n": n, "seed": seed}
    if not os.path.exists(name):
        raise UsageError(f"unknown dataset {name!r} (not a builtin, not a file)")
    with open(name) as fh:
        payload = json.load(fh)
    strokes = StrokeSet(payload["strokes"],
                        payload["canvas"]["width"], payload["canvas"]["height"])
    jitter = float(payload.get("jitter_sigma", 0.02))
    ds = strokes_to_dataset(strokes, n, jitter, seed)
    return ds, {"kind": "custom", "file": name, "n": n, "seed": seed,
                "jitter_sigma": jitter}


def cmd_train(args):
    dataset, ds_prov = _load_dataset_arg(args.dataset, args.n, args.data_seed)
    config = TrainConfig(epochs=args.epochs, steps_per_epoch=args.steps_per_epoch,
                         batch_size=args.batch_size, lr=args.lr, seed=args.seed)

    def on_epoch(snap):
        print(f"epoch {snap.epoch:4d}  loss {snap.mean_loss:.6f}")

    try:
        model = train(dataset, args.objective, config, on_epoch=on_epoch,
                      provenance={"dataset": ds_prov})
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    save_model(model, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_sample(args):
    model = load_model_file(args.model)
    kind = SamplerKind(args.sampler)
    from .samplers import compatible_samplers
    if kind.value not in compatible_samplers(model.objective):
        raise UsageError(f"sampler {kind.value} incompatible with objective "
                         f"{model.objective.value}")
    steps = args.steps if args.steps else default_steps(model, kind)
    rng = np.random.default_rng(args.seed)
    trajs = sample_trajectories(model, kind, args.n, steps, rng)
    payload = {
        "times": trajs[0].times.tolist(),
        "trajectories": [tr.positions.ravel().tolist() for tr in trajs],
        "data_bounds": list(model.data_bounds),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    print(f"wrote {args.out} ({args.n} trajectories x {steps + 1} frames)")
    return 0


def cmd_density(args):
    model = load_model_file(args.model)
    if not 0.0 <= args.t <= 1.0:
        raise UsageError(f"--t must be in [0, 1], got {args.t}")
    from .samplers import compatible_samplers
    kind = args.sampler or compatible_samplers(model.objective)[-1]
    rng = np.random.default_rng(args.seed)
    grid = density_at_time(model, kind, args.t, args.n, rng)
    contours = marching_squares(grid, contour_levels(grid, DEFAULT_N_LEVELS))
    from .service import contour_payload, grid_payload
    payload = {"grid": grid_payload(grid), "contours": contour_payload(contours),
               "t": args.t}
    with open(args.out, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def regen_pretrained(outdir, recipes=None, quiet=False):
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for name, (kind, n, ds_seed, objective, seed) in (recipes or PRETRAINED_RECIPES).items():
        dataset = builtin_dataset(kind, n, ds_seed)
        config = TrainConfig(seed=seed)
        model = train(dataset, objective, config, provenance={
            "dataset": {"kind": kind, "n": n, "seed": ds_seed}})
        path = os.path.join(outdir, f"{name}.json")
        save_model(model, path)
        paths.append(path)
        if not quiet:
            print(f"wrote {path}")
    return paths


def cmd_regen_pretrained(args):
    try:
        regen_pretrained(args.outdir)
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 3
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app
    try:
        uvicorn.run(create_app(), host=args.host, port=args.port,
                    log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"cannot serve on {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 3
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="difflab",
                                description="2D diffusion-model lab")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model and write a model file")
    t.add_argument("--dataset", required=True,
                   help="three_dots, smiley, or a stroke JSON file")
    t.add_argument("--objective", choices=[o.value for o in Objective],
                   default="flow_matching")
    t.add_argument("--epochs", type=int, default=60)
    t.add_argument("--steps-per-epoch", type=int, default=40)
    t.add_argument("--batch-size", type=int, default=256)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--n", type=int, default=2000, help="dataset size")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--data-seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="sample trajectories from a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--sampler", choices=[k.value for k in SamplerKind],
                   required=True)
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--steps", type=int, default=0, help="0 = sampler default")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("density", help="export a density grid + contours")
    d.add_argument("--model", required=True)
    d.add_argument("--t", type=float, required=True)
    d.add_argument("--n", type=int, default=1000)
    d.add_argument("--sampler", default=None)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_density)

    r = sub.add_parser("regen-pretrained",
                       help="retrain and rewrite the bundled model files")
    r.add_argument("--outdir", required=True)
    r.set_defaults(func=cmd_regen_pretrained)

    v = sub.add_parser("serve", help="run the local session service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8606)
    v.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
