"""Reverse-process samplers recording full trajectories on the UI-time grid.

UI time runs opposite to the internal step index: t=0 is the Gaussian
source, t=1 is the data distribution. All dynamics happen in normalized
model space; rescaling to data coordinates happens once at emission.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import ContractError, UsageError
from .datasets import denormalize_points
from .diffusion import NoiseSchedule, Objective
from .model import DenoiserModel, eps_predictor, velocity_predictor

DEFAULT_DETERMINISTIC_STEPS = 25


class SamplerKind(str, Enum):
    ANCESTRAL = "ancestral"
    DETERMINISTIC = "deterministic"
    EULER_ODE = "euler_ode"


COMPATIBLE = {
    Objective.NOISE_PREDICTION: (SamplerKind.ANCESTRAL, SamplerKind.DETERMINISTIC),
    Objective.FLOW_MATCHING: (SamplerKind.EULER_ODE,),
}


@dataclass
class Trajectory:
    times: np.ndarray  # (S+1,), uniform 0..1
    positions: np.ndarray  # (S+1, 2)
    source_index: int


def sample_source(n: int, rng) -> np.ndarray:
    """n i.i.d. draws from the standard 2D Gaussian source."""
    if n < 1:
        raise ContractError(f"need n >= 1, got {n}")
    return rng.standard_normal((n, 2))


def to_ui_time(k: int, T: int) -> float:
    """Map remaining-noise step k (k=T at the start) to UI time."""
    if not 0 <= k <= T:
        raise ContractError(f"step {k} outside 0..{T}")
    return 1.0 - k / T


def ancestral_step(x_k, k: int, eps_hat, sched: NoiseSchedule, rng):
    """Stochastic reverse step; the final step (k=1) adds no noise."""
    if not 1 <= k <= sched.T:
        raise ContractError(f"step {k} outside 1..{sched.T}")
    beta = sched.beta[k - 1]
    alpha = sched.alpha[k - 1]
    abar = sched.alpha_bar[k - 1]
    x_k = np.asarray(x_k, dtype=float)
    mean = (x_k - (beta / np.sqrt(1.0 - abar)) * np.asarray(eps_hat)) / np.sqrt(alpha)
    if k == 1:
        return mean
    return mean + np.sqrt(beta) * rng.standard_normal(x_k.shape)


def deterministic_step(x_k, k_from: int, k_to: int, eps_hat, sched: NoiseSchedule):
    """Noise-free skip step: reconstruct x0, re-noise to level k_to."""
    if not (0 <= k_to <= k_from <= sched.T):
        raise ContractError(f"need 0 <= k_to <= k_from <= {sched.T}, got {k_from}->{k_to}")
    ab_from = sched.abar(k_from)
    ab_to = sched.abar(k_to)
    x_k = np.asarray(x_k, dtype=float)
    eps_hat = np.asarray(eps_hat, dtype=float)
    x0_hat = (x_k - np.sqrt(1.0 - ab_from) * eps_hat) / np.sqrt(ab_from)
    return np.sqrt(ab_to) * x0_hat + np.sqrt(1.0 - ab_to) * eps_hat


def euler_flow_step(x, s: float, v_hat, ds: float):
    """Forward Euler along the learned velocity field."""
    if ds <= 0 or s + ds > 1.0 + 1e-12:
        raise ContractError(f"bad step: s={s}, ds={ds}")
    return np.asarray(x, dtype=float) + ds * np.asarray(v_hat, dtype=float)


def run_ancestral(eps_fn, x0, sched: NoiseSchedule, rng):
    """Full reverse chain from k=T to 0; returns (T+1, n, 2) positions."""
    x = np.asarray(x0, dtype=float)
    out = [x]
    for k in range(sched.T, 0, -1):
        x = ancestral_step(x, k, eps_fn(x, k), sched, rng)
        out.append(x)
    return np.stack(out)


def run_deterministic(eps_fn, x0, sched: NoiseSchedule, steps: int):
    if steps < 1 or sched.T % steps != 0:
        raise UsageError(f"deterministic sampler needs steps dividing T={sched.T}, got {steps}")
    stride = sched.T // steps
    x = np.asarray(x0, dtype=float)
    out = [x]
    for k in range(sched.T, 0, -stride):
        x = deterministic_step(x, k, k - stride, eps_fn(x, k), sched)
        out.append(x)
    return np.stack(out)


def run_euler(v_fn, x0, steps: int):
    if steps < 1:
        raise UsageError(f"need steps >= 1, got {steps}")
    ds = 1.0 / steps
    x = np.asarray(x0, dtype=float)
    out = [x]
    for i in range(steps):
        x = euler_flow_step(x, i * ds, v_fn(x, i * ds), ds)
        out.append(x)
    return np.stack(out)


def sample_trajectories(model: DenoiserModel, kind: SamplerKind, n: int,
                        steps: int, rng, rescale: bool = True):
    """Draw n source points and integrate them to the data distribution.

    Returns a list of Trajectory on the uniform UI-time grid
    {0, 1/steps, ..., 1}, in data coordinates unless rescale is False.
    """
    kind = SamplerKind(kind)
    if kind not in COMPATIBLE[model.objective]:
        raise UsageError(
            f"sampler {kind.value} incompatible with objective {model.objective.value}"
        )
    src = sample_source(n, rng)
    if kind == SamplerKind.ANCESTRAL:
        if steps != model.sched.T:
            raise UsageError(f"ancestral sampler requires steps == T ({model.sched.T})")
        path = run_ancestral(eps_predictor(model), src, model.sched, rng)
    elif kind == SamplerKind.DETERMINISTIC:
        path = run_deterministic(eps_predictor(model), src, model.sched, steps)
    else:
        path = run_euler(velocity_predictor(model), src, steps)

    if rescale:
        path = denormalize_points(path, model.data_bounds)
    times = np.linspace(0.0, 1.0, steps + 1)
    # path is (S+1, n, 2); slice per sample
    return [Trajectory(times, path[:, i, :], i) for i in range(n)]


def positions_at_time(trajectories, t: float):
    """Linear interpolation of every trajectory at UI time t.

    Returns (points, clamped): clamped flags a t outside [0, 1] that was
    pulled back to the nearest endpoint.
    """
    if not trajectories:
        raise ContractError("need at least one trajectory")
    clamped = t < 0.0 or t > 1.0
    t = min(max(t, 0.0), 1.0)
    times = trajectories[0].times
    pos = np.stack([tr.positions for tr in trajectories])  # (n, S+1, 2)
    S = len(times) - 1
    f = t * S
    lo = int(np.floor(f))
    if lo >= S:
        return pos[:, S, :].copy(), clamped
    w = f - lo
    return (1.0 - w) * pos[:, lo, :] + w * pos[:, lo + 1, :], clamped


def default_steps(model: DenoiserModel, kind: SamplerKind) -> int:
    kind = SamplerKind(kind)
    if kind == SamplerKind.ANCESTRAL:
        return model.sched.T
    if kind == SamplerKind.DETERMINISTIC:
        if model.sched.T % DEFAULT_DETERMINISTIC_STEPS == 0:
            return DEFAULT_DETERMINISTIC_STEPS
        return model.sched.T
    return 50


def compatible_samplers(objective: Objective):
    return [k.value for k in COMPATIBLE[Objective(objective)]]
