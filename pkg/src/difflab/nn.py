"""Minimal dense network with hand-rolled reverse-mode gradients and Adam.

Everything here is a pure function of its inputs: parameters are plain
numpy arrays held in small dataclasses, and every op returns fresh values.
Double precision throughout; persistence downcasts separately.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import ConfigError, ContractError

ACTIVATIONS = ("relu", "silu")


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_dims: tuple
    output_dim: int
    activation: str = "silu"
    time_embed_dim: int = 16

    def __post_init__(self):
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ConfigError(f"all layer dims must be >= 1, got {dims}")
        if self.time_embed_dim < 2 or self.time_embed_dim % 2 != 0:
            raise ConfigError(
                f"time_embed_dim must be even and >= 2, got {self.time_embed_dim}"
            )
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))

    @property
    def layer_dims(self):
        """(in, out) pairs for every affine layer."""
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class MlpParams:
    weights: list  # per layer, shape (out, in)
    biases: list  # per layer, shape (out,)
    activation: str = "silu"

    def copy(self):
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )


@dataclass
class ForwardCache:
    inputs: list  # input to each affine layer, (N, in)
    preacts: list  # pre-activation of each layer, (N, out)
    activation: str


def mlp_init(config: MlpConfig, seed: int) -> MlpParams:
    """Glorot-uniform weights, zero biases. Deterministic given seed."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in config.layer_dims:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases, config.activation)


def time_embedding(s, dim: int) -> np.ndarray:
    """Sinusoidal embedding of a scalar time in [0, 1].

    Entry 2j is sin(s * w_j), entry 2j+1 is cos(s * w_j) with
    w_j = 1000^(2j/dim). Accepts a scalar or a 1-D batch of times.
    """
    if dim < 2 or dim % 2 != 0:
        raise ConfigError(f"embedding dim must be even and >= 2, got {dim}")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    j = np.arange(dim // 2)
    omega = 1000.0 ** (2.0 * j / dim)
    phase = s_arr[:, None] * omega[None, :]  # (N, dim/2)
    out = np.empty((s_arr.shape[0], dim))
    out[:, 0::2] = np.sin(phase)
    out[:, 1::2] = np.cos(phase)
    if np.isscalar(s) or np.asarray(s).ndim == 0:
        return out[0]
    return out


def _act(name, x):
    if name == "relu":
        return np.maximum(x, 0.0)
    # silu: x * sigmoid(x)
    return x / (1.0 + np.exp(-x))


def _act_grad(name, x):
    if name == "relu":
        return (x > 0.0).astype(float)
    sig = 1.0 / (1.0 + np.exp(-x))
    return sig * (1.0 + x * (1.0 - sig))


def mlp_forward(params: MlpParams, inputs: np.ndarray):
    """Affine + activation stack; the final layer is linear.

    Returns (outputs, cache) where cache feeds mlp_backward.
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.weights[0].shape[1]:
        raise ContractError(
            f"input shape {x.shape} does not match first layer "
            f"(expects width {params.weights[0].shape[1]})"
        )
    n_layers = len(params.weights)
    cache = ForwardCache([], [], params.activation)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append(x)
        z = x @ w.T + b
        cache.preacts.append(z)
        x = z if i == n_layers - 1 else _act(params.activation, z)
    return x, cache


def mlp_backward(params: MlpParams, cache: ForwardCache, out_grad: np.ndarray):
    """Gradients w.r.t. all weights and biases, summed over the batch.

    out_grad holds the per-sample gradient of the scalar objective w.r.t.
    the network output.
    """
    g = np.asarray(out_grad, dtype=float)
    n_layers = len(params.weights)
    if len(cache.preacts) != n_layers or g.shape != cache.preacts[-1].shape:
        raise ContractError("cache/out_grad do not match this parameter set")
    gw = [None] * n_layers
    gb = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        if i != n_layers - 1:
            g = g * _act_grad(cache.activation, cache.preacts[i])
        gw[i] = g.T @ cache.inputs[i]
        gb[i] = g.sum(axis=0)
        if i > 0:
            g = g @ params.weights[i]
    return MlpParams(gw, gb, params.activation)


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(params: MlpParams, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = lambda arrs: [np.zeros_like(a) for a in arrs]
    return AdamState(
        m=zeros(params.weights) + zeros(params.biases),
        v=zeros(params.weights) + zeros(params.biases),
        lr=lr, beta1=beta1, beta2=beta2, eps=eps,
    )


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState):
    """One Adam update with bias correction. Returns (params', state')."""
    tensors = params.weights + params.biases
    gtensors = grads.weights + grads.biases
    if len(tensors) != len(state.m):
        raise ContractError("optimizer state does not match parameter count")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_t = [], [], []
    for p, g, m, v in zip(tensors, gtensors, state.m, state.v):
        m2 = b1 * m + (1.0 - b1) * g
        v2 = b2 * v + (1.0 - b2) * g * g
        m_hat = m2 / (1.0 - b1 ** t)
        v_hat = v2 / (1.0 - b2 ** t)
        new_m.append(m2)
        new_v.append(v2)
        new_t.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    k = len(params.weights)
    out = MlpParams(new_t[:k], new_t[k:], params.activation)
    return out, replace(state, m=new_m, v=new_v, step=t)
