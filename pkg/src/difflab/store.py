"""Versioned JSON serialization of trained models and the bundled
pretrained registry.

Files are canonical (sorted keys, fixed separators) so identical models
serialize to identical bytes. Weights are stored at single precision as
decimal numbers; no binary blobs, so the files diff cleanly and the
frontend can consume them directly.
"""

import json
from importlib import resources

import numpy as np

from .diffusion import Objective, linear_schedule
from .model import DenoiserModel
from .nn import MlpConfig, MlpParams

FORMAT_VERSION = 1

PRETRAINED_NAMES = (
    "three_dots_flow",
    "three_dots_noise",
    "smiley_flow",
    "smiley_noise",
)


class ModelFormatError(ValueError):
    """Malformed or incompatible model file."""


class UnsupportedVersionError(ModelFormatError):
    pass


def _f32(arr):
    """Round to single precision, return plain floats for JSON."""
    return [float(v) for v in np.asarray(arr, dtype=np.float32).ravel()]


def model_to_dict(model: DenoiserModel) -> dict:
    layers = []
    for w, b in zip(model.params.weights, model.params.biases):
        layers.append({"shape": list(w.shape), "weights": _f32(w), "bias": _f32(b)})
    sched = None
    if model.sched is not None:
        sched = {"T": model.sched.T, "beta_min": model.sched.beta_min,
                 "beta_max": model.sched.beta_max}
    return {
        "format_version": FORMAT_VERSION,
        "objective": model.objective.value,
        "mlp": {
            "input_dim": model.config.input_dim,
            "hidden_dims": list(model.config.hidden_dims),
            "output_dim": model.config.output_dim,
            "activation": model.config.activation,
            "time_embed_dim": model.config.time_embed_dim,
        },
        "schedule": sched,
        "data_bounds": [float(v) for v in model.data_bounds],
        "dataset_kind": model.dataset_kind,
        "provenance": model.provenance or {},
        "layers": layers,
    }


def save_model(model: DenoiserModel, destination=None) -> bytes:
    """Serialize to canonical JSON bytes; optionally also write a file."""
    payload = json.dumps(model_to_dict(model), sort_keys=True,
                         separators=(",", ":")).encode("utf-8") + b"\n"
    if destination is not None:
        try:
            with open(destination, "wb") as fh:
                fh.write(payload)
        except OSError as exc:
            raise OSError(f"cannot write model file {destination}: {exc}") from exc
    return payload


def _require(obj, field, kind=None):
    if field not in obj:
        raise ModelFormatError(f"model file missing field {field!r}")
    val = obj[field]
    if kind is not None and not isinstance(val, kind):
        raise ModelFormatError(f"model file field {field!r} has wrong type")
    return val


def load_model(data) -> DenoiserModel:
    """Parse model bytes (or a dict already decoded) back into a model."""
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError("model file must be a JSON object")

    version = _require(data, "format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported model format_version {version}, expected {FORMAT_VERSION}")

    mlp = _require(data, "mlp", dict)
    config = MlpConfig(
        input_dim=_require(mlp, "input_dim", int),
        hidden_dims=tuple(_require(mlp, "hidden_dims", list)),
        output_dim=_require(mlp, "output_dim", int),
        activation=_require(mlp, "activation", str),
        time_embed_dim=_require(mlp, "time_embed_dim", int),
    )
    objective = Objective(_require(data, "objective", str))

    layers = _require(data, "layers", list)
    dims = config.layer_dims
    if len(layers) != len(dims):
        raise ModelFormatError(
            f"expected {len(dims)} layers, file has {len(layers)}")
    weights, biases = [], []
    for idx, (layer, (fan_in, fan_out)) in enumerate(zip(layers, dims)):
        shape = tuple(_require(layer, "shape", list))
        if shape != (fan_out, fan_in):
            raise ModelFormatError(
                f"layer {idx} shape {shape} does not match config {(fan_out, fan_in)}")
        raw_w = _require(layer, "weights", list)
        raw_b = _require(layer, "bias", list)
        if len(raw_w) != fan_in * fan_out or len(raw_b) != fan_out:
            raise ModelFormatError(f"layer {idx} array lengths do not match shape")
        try:
            w = np.asarray([float(v) for v in raw_w], dtype=float).reshape(fan_out, fan_in)
            b = np.asarray([float(v) for v in raw_b], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"layer {idx} contains malformed numbers: {exc}") from exc
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ModelFormatError(f"layer {idx} contains non-finite values")
        weights.append(w)
        biases.append(b)

    sched_spec = data.get("schedule")
    sched = None
    if sched_spec is not None:
        sched = linear_schedule(_require(sched_spec, "T", int),
                                float(_require(sched_spec, "beta_min")),
                                float(_require(sched_spec, "beta_max")))
    bounds = _require(data, "data_bounds", list)
    if len(bounds) != 4:
        raise ModelFormatError("data_bounds must have 4 entries")

    return DenoiserModel(
        params=MlpParams(weights, biases, config.activation),
        config=config,
        objective=objective,
        sched=sched,
        data_bounds=tuple(float(v) for v in bounds),
        dataset_kind=data.get("dataset_kind", "custom"),
        provenance=data.get("provenance") or {},
    )


def load_model_file(path) -> DenoiserModel:
    try:
        with open(path, "rb") as fh:
            return load_model(fh.read())
    except OSError as exc:
        raise OSError(f"cannot read model file {path}: {exc}") from exc


def pretrained_registry():
    """The four bundled (name, bytes) model files."""
    out = []
    pkg = resources.files(__package__) / "pretrained"
    for name in PRETRAINED_NAMES:
        f = pkg / f"{name}.json"
        if not f.is_file():
            raise RuntimeError(f"bundled pretrained model {name!r} is missing")
        out.append((name, f.read_bytes()))
    return out


def load_pretrained(name: str) -> DenoiserModel:
    for reg_name, data in pretrained_registry():
        if reg_name == name:
            return load_model(data)
    raise KeyError(f"unknown pretrained model {name!r}")
