"""The trained-denoiser value object and predictor adapters.

A DenoiserModel is immutable once built; samplers only ever read it.
Samplers consume plain predictor callables so analytic (closed-form)
predictors can stand in for a network in tests and oracles.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ContractError
from .diffusion import NoiseSchedule, Objective
from .nn import MlpConfig, MlpParams, mlp_forward, time_embedding


@dataclass
class DenoiserModel:
    params: MlpParams
    config: MlpConfig
    objective: Objective
    sched: Optional[NoiseSchedule]  # present iff noise_prediction
    data_bounds: tuple  # square in original coords mapped onto [-1,1]^2
    dataset_kind: str = "custom"
    provenance: Optional[dict] = None  # seed + train config, for regeneration
    partial: bool = False  # training was cancelled before finishing

    def __post_init__(self):
        self.objective = Objective(self.objective)
        if self.objective == Objective.NOISE_PREDICTION and self.sched is None:
            raise ContractError("noise_prediction model requires a schedule")


def net_apply(params: MlpParams, x: np.ndarray, s, embed_dim: int) -> np.ndarray:
    """Run the denoiser on 2D points conditioned on time s (scalar or per-row)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s_arr = np.asarray(s, dtype=float)
    if s_arr.ndim == 0:
        emb = np.broadcast_to(time_embedding(float(s_arr), embed_dim), (len(x), embed_dim))
    else:
        emb = time_embedding(s_arr, embed_dim)
    out, _ = mlp_forward(params, np.concatenate([x, emb], axis=1))
    return out


def eps_predictor(model: DenoiserModel):
    """Noise predictor eps_hat(x, k); conditions the net on k/T."""
    if model.objective != Objective.NOISE_PREDICTION:
        raise ContractError("eps predictor needs a noise_prediction model")
    T = model.sched.T
    dim = model.config.time_embed_dim

    def eps_fn(x, k):
        return net_apply(model.params, x, k / T, dim)

    return eps_fn


def velocity_predictor(model: DenoiserModel):
    """Velocity predictor v_hat(x, s) for flow-matching models."""
    if model.objective != Objective.FLOW_MATCHING:
        raise ContractError("velocity predictor needs a flow_matching model")
    dim = model.config.time_embed_dim

    def v_fn(x, s):
        return net_apply(model.params, x, s, dim)

    return v_fn
