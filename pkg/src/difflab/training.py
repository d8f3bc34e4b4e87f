"""Mini-batch training for both objectives, streaming per-epoch snapshots.

Runs are fully deterministic given the config seed, including the preview
samples attached to each snapshot. Cancellation is checked once per epoch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import ContractError
from .diffusion import Objective, flow_interpolant, linear_schedule
from .model import DenoiserModel
from .nn import (MlpConfig, adam_init, adam_step, mlp_backward, mlp_forward,
                 mlp_init, time_embedding)

DEFAULT_HIDDEN = (64, 64)
DEFAULT_TIME_EMBED = 16
DIVERGENCE_LIMIT = 1e6


class TrainingDiverged(RuntimeError):
    """Loss went non-finite or blew past the divergence guard."""


@dataclass
class TrainConfig:
    epochs: int = 150
    steps_per_epoch: int = 50
    batch_size: int = 256
    lr: float = 2e-3
    seed: int = 0
    preview_n: int = 400
    preview_steps: int = 20

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.preview_n < 1:
            raise ContractError("epochs, batch_size, preview_n must be >= 1")
        if self.steps_per_epoch < 0:
            raise ContractError("steps_per_epoch must be >= 0")
        if self.lr <= 0:
            raise ContractError("lr must be positive")


@dataclass
class EpochSnapshot:
    epoch: int  # 1-based
    mean_loss: float
    preview: np.ndarray  # (preview_n, 2) in data coordinates


def default_mlp_config(activation: str = "silu") -> MlpConfig:
    return MlpConfig(
        input_dim=2 + DEFAULT_TIME_EMBED,
        hidden_dims=DEFAULT_HIDDEN,
        output_dim=2,
        activation=activation,
        time_embed_dim=DEFAULT_TIME_EMBED,
    )


def noise_loss_given(params, batch, k, eps, sched, embed_dim=DEFAULT_TIME_EMBED):
    """Noise-prediction loss with frozen (k, eps) draws; returns (loss, grads)."""
    batch = np.asarray(batch, dtype=float)
    n = len(batch)
    abar = sched.alpha_bar[k - 1][:, None]
    x_k = np.sqrt(abar) * batch + np.sqrt(1.0 - abar) * eps
    emb = time_embedding(k / sched.T, embed_dim)
    out, cache = mlp_forward(params, np.concatenate([x_k, emb], axis=1))
    resid = out - eps
    loss = float((resid ** 2).sum(axis=1).mean())
    grads = mlp_backward(params, cache, 2.0 * resid / n)
    return loss, grads


def loss_noise_prediction(params, batch, sched, rng, embed_dim=DEFAULT_TIME_EMBED):
    batch = np.asarray(batch, dtype=float)
    if len(batch) == 0:
        raise ContractError("empty batch")
    k = rng.integers(1, sched.T + 1, size=len(batch))
    eps = rng.standard_normal(batch.shape)
    return noise_loss_given(params, batch, k, eps, sched, embed_dim)


def flow_loss_given(params, batch, z, s, embed_dim=DEFAULT_TIME_EMBED):
    """Flow-matching loss with frozen (z, s) draws; returns (loss, grads)."""
    batch = np.asarray(batch, dtype=float)
    n = len(batch)
    x_s, v_target = flow_interpolant(z, batch, s)
    emb = time_embedding(s, embed_dim)
    out, cache = mlp_forward(params, np.concatenate([x_s, emb], axis=1))
    resid = out - v_target
    loss = float((resid ** 2).sum(axis=1).mean())
    grads = mlp_backward(params, cache, 2.0 * resid / n)
    return loss, grads


def loss_flow_matching(params, batch, rng, embed_dim=DEFAULT_TIME_EMBED):
    batch = np.asarray(batch, dtype=float)
    if len(batch) == 0:
        raise ContractError("empty batch")
    z = rng.standard_normal(batch.shape)
    s = rng.uniform(size=len(batch))
    return flow_loss_given(params, batch, z, s, embed_dim)


def preview_sampler_steps(objective, sched, requested: int) -> int:
    """Deterministic previews need a step count dividing T."""
    if objective == Objective.FLOW_MATCHING:
        return requested
    best = 1
    for d in range(1, sched.T + 1):
        if sched.T % d == 0 and d <= requested:
            best = d
    return best


def train(dataset, objective, config: TrainConfig = None, on_epoch=None,
          cancel=None, provenance=None) -> DenoiserModel:
    """Run the full training loop; returns the trained model.

    on_epoch receives an EpochSnapshot after every epoch. cancel, if
    given, is checked between epochs (anything with is_set(), e.g. a
    threading.Event); a cancelled run returns the partial model.
    """
    from .samplers import SamplerKind, sample_trajectories  # late: avoids cycle

    config = config or TrainConfig()
    objective = Objective(objective)
    pts = dataset.points
    if len(pts) == 0:
        raise ContractError("empty dataset")

    mlp_config = default_mlp_config()
    params = mlp_init(mlp_config, seed=config.seed)
    sched = linear_schedule() if objective == Objective.NOISE_PREDICTION else None
    state = adam_init(params, lr=config.lr)
    rng = np.random.default_rng(config.seed)

    prov = dict(provenance or {})
    prov.setdefault("seed", config.seed)
    prov.setdefault("train_config", {
        "epochs": config.epochs, "steps_per_epoch": config.steps_per_epoch,
        "batch_size": config.batch_size, "lr": config.lr,
        "preview_n": config.preview_n, "preview_steps": config.preview_steps,
    })

    def build_model(partial):
        return DenoiserModel(
            params=params, config=mlp_config, objective=objective, sched=sched,
            data_bounds=dataset.bounds, dataset_kind=dataset.kind,
            provenance=prov, partial=partial,
        )

    preview_kind = (SamplerKind.EULER_ODE if objective == Objective.FLOW_MATCHING
                    else SamplerKind.DETERMINISTIC)
    preview_steps = preview_sampler_steps(objective, sched, config.preview_steps)

    partial = False
    for epoch in range(1, config.epochs + 1):
        if cancel is not None and cancel.is_set():
            partial = True
            break
        losses = []
        for _ in range(config.steps_per_epoch):
            idx = rng.integers(0, len(pts), size=config.batch_size)
            batch = pts[idx]
            if objective == Objective.NOISE_PREDICTION:
                loss, grads = loss_noise_prediction(params, batch, sched, rng)
            else:
                loss, grads = loss_flow_matching(params, batch, rng)
            if not math.isfinite(loss) or loss > DIVERGENCE_LIMIT:
                raise TrainingDiverged(f"loss {loss} at epoch {epoch}")
            params, state = adam_step(params, grads, state)
            losses.append(loss)
        if on_epoch is not None:
            preview_rng = np.random.default_rng([config.seed, epoch])
            trajs = sample_trajectories(build_model(False), preview_kind,
                                        config.preview_n, preview_steps,
                                        preview_rng)
            preview = np.stack([tr.positions[-1] for tr in trajs])
            mean_loss = float(np.mean(losses)) if losses else 0.0
            on_epoch(EpochSnapshot(epoch, mean_loss, preview))

    return build_model(partial)
