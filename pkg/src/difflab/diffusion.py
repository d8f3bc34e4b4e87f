"""Noise schedules, the closed-form forward process, and the straight-line
flow interpolant. Shared by the trainer and every sampler."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import ConfigError, ContractError

DEFAULT_T = 50
DEFAULT_BETA_MIN = 1e-4
DEFAULT_BETA_MAX = 0.05


class Objective(str, Enum):
    NOISE_PREDICTION = "noise_prediction"
    FLOW_MATCHING = "flow_matching"


@dataclass(frozen=True)
class NoiseSchedule:
    """Discrete variance-preserving schedule.

    beta/alpha/alpha_bar are indexed k = 1..T; array position k-1 holds
    step k. alpha_bar is strictly decreasing.
    """

    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    beta_min: float
    beta_max: float

    def abar(self, k: int) -> float:
        """alpha_bar at step k, with the convention abar(0) = 1."""
        if not 0 <= k <= self.T:
            raise ContractError(f"step {k} outside 0..{self.T}")
        return 1.0 if k == 0 else float(self.alpha_bar[k - 1])


def linear_schedule(T: int = DEFAULT_T, beta_min: float = DEFAULT_BETA_MIN,
                    beta_max: float = DEFAULT_BETA_MAX) -> NoiseSchedule:
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    if not (0.0 < beta_min <= beta_max < 1.0):
        raise ConfigError(f"need 0 < beta_min <= beta_max < 1, got {beta_min}, {beta_max}")
    if T == 1:
        beta = np.array([beta_min])
    else:
        beta = np.linspace(beta_min, beta_max, T)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    return NoiseSchedule(T, beta, alpha, alpha_bar, beta_min, beta_max)


def forward_noise(x0, k: int, eps, sched: NoiseSchedule):
    """x_k = sqrt(abar_k) x0 + sqrt(1 - abar_k) eps. Works on (2,) points
    or (N, 2) batches."""
    if not 1 <= k <= sched.T:
        raise ContractError(f"step {k} outside 1..{sched.T}")
    ab = sched.alpha_bar[k - 1]
    return np.sqrt(ab) * np.asarray(x0, dtype=float) + np.sqrt(1.0 - ab) * np.asarray(eps, dtype=float)


def flow_interpolant(z, x1, s):
    """Straight-line interpolant x_s = (1-s) z + s x1 with constant target
    velocity x1 - z. s may be scalar or per-row for batched inputs."""
    z = np.asarray(z, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or np.any(s_arr > 1.0):
        raise ContractError(f"interpolation time outside [0, 1]")
    if s_arr.ndim == 1:
        s_arr = s_arr[:, None]
    x_s = (1.0 - s_arr) * z + s_arr * x1
    return x_s, x1 - z
