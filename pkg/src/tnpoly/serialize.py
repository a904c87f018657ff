"""File formats: JSON for tensors and models, CSV for series and profiles.

Floats are written with 17 significant digits, which round-trips float64
bit-exactly; all writers are deterministic functions of their inputs so
identical configurations produce identical bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .entanglement import EEProfile, ScalingFit
from .errors import ValidationError
from .nonlin import Nonlinearity, parse
from .problem import CoeffTensor, ProblemSpec, Representation
from .tensor_train import TTState
from .tree_model import TcnWeights, TreeNetwork


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x}")
    return format(x, ".17g")


def dumps(obj) -> str:
    """Compact deterministic JSON with 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        return "[" + ", ".join(dumps(v) for v in seq) + "]"
    raise ValidationError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# -- coefficient tensors ----------------------------------------------------

def coeff_to_obj(w: CoeffTensor) -> dict:
    return {
        "rep": w.spec.rep.value,
        "L": w.spec.L,
        "P": w.spec.P,
        "shape": list(w.spec.shape),
        "data": w.tensor.ravel(),
    }


def coeff_from_obj(obj: dict) -> CoeffTensor:
    try:
        spec = ProblemSpec(int(obj["L"]), int(obj["P"]), Representation(obj["rep"]))
        shape = tuple(int(s) for s in obj["shape"])
        data = np.asarray(obj["data"], dtype=np.float64)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed coefficient tensor record: {exc}") from exc
    if shape != spec.shape:
        raise ValidationError(f"recorded shape {shape} does not match spec shape {spec.shape}")
    return CoeffTensor(spec, data.reshape(shape) if shape else data.reshape(()))


# -- tensor trains ----------------------------------------------------------

def tt_to_obj(tt: TTState) -> dict:
    return {
        "dims": list(tt.dims),
        "ranks": list(tt.ranks),
        "cores": [c.ravel() for c in tt.cores],
    }


def tt_from_obj(obj: dict) -> TTState:
    try:
        dims = [int(d) for d in obj["dims"]]
        ranks = [int(r) for r in obj["ranks"]]
        flats = obj["cores"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed tensor train record: {exc}") from exc
    if len(ranks) != len(dims) + 1 or len(flats) != len(dims):
        raise ValidationError("inconsistent dims/ranks/cores lengths")
    cores = []
    for k, flat in enumerate(flats):
        shape = (ranks[k], dims[k], ranks[k + 1])
        arr = np.asarray(flat, dtype=np.float64)
        if arr.size != int(np.prod(shape)):
            raise ValidationError(f"core {k} has {arr.size} entries, expected {int(np.prod(shape))}")
        cores.append(arr.reshape(shape))
    return TTState(tuple(cores))


# -- tree networks and TCN weights -------------------------------------------

def tree_to_obj(net: TreeNetwork) -> dict:
    return {
        "leaf_dim": net.leaf_dim,
        "channel_dims": list(net.channel_dims),
        "nonlinearity": net.nonlinearity.value,
        "levels": [[t.ravel() for t in lvl] for lvl in net.levels],
        "top": net.top.ravel(),
    }


def tree_from_obj(obj: dict) -> TreeNetwork:
    try:
        leaf_dim = int(obj["leaf_dim"])
        channel_dims = [int(c) for c in obj["channel_dims"]]
        f = parse(obj["nonlinearity"])
        raw_levels = obj["levels"]
        top_flat = np.asarray(obj["top"], dtype=np.float64)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed tree network record: {exc}") from exc
    if len(raw_levels) != len(channel_dims):
        raise ValidationError("levels and channel_dims disagree")
    levels = []
    child = leaf_dim
    for l, lvl in enumerate(raw_levels):
        shape = (child, child, channel_dims[l])
        levels.append(tuple(np.asarray(t, dtype=np.float64).reshape(shape) for t in lvl))
        child = channel_dims[l]
    top = top_flat.reshape(child, child)
    return TreeNetwork(leaf_dim, tuple(levels), top, nonlinearity=f)


def tcn_weights_to_obj(wts: TcnWeights, f: Nonlinearity) -> dict:
    return {
        "first_layer": [list(row) for row in wts.first_layer],
        "top": list(wts.top),
        "saturation": wts.saturation,
        "tolerance": wts.tolerance,
        "nonlinearity": f.value,
    }


def tcn_weights_from_obj(obj: dict):
    try:
        f = parse(obj["nonlinearity"])
        first = np.asarray(obj["first_layer"], dtype=np.float64)
        top = np.asarray(obj["top"], dtype=np.float64)
        tol = float(obj["tolerance"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"malformed TCN weights record: {exc}") from exc
    if "saturation" in obj:
        wts = TcnWeights(first, top, float(obj["saturation"]), tol)
    else:
        wts = TcnWeights.for_nonlinearity(first, top, f, tol)
    return wts, f


# -- CSV writers -------------------------------------------------------------

def _config_comment(config: dict | None) -> str:
    if not config:
        return ""
    return "# config: " + dumps(config) + "\n"


def write_profile_csv(path, profile: EEProfile, config: dict | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(_config_comment(config))
        fh.write("cut,entropy_nats,bound_nats\n")
        for l, (s, b) in enumerate(zip(profile.entropies, profile.bounds), start=1):
            fh.write(f"{l},{format_float(s)},{format_float(b)}\n")


def classification_to_obj(scaling_class, fit: ScalingFit | None) -> dict:
    return {
        "class": scaling_class.value if scaling_class is not None else None,
        "residuals": dict(fit.residuals) if fit else {},
        "coefficients": {k: list(v) for k, v in fit.coefficients.items()} if fit else {},
    }


def write_series_csv(path, values, config: dict | None = None) -> None:
    values = np.asarray(values, dtype=np.float64).ravel()
    with open(path, "w", newline="\n") as fh:
        fh.write(_config_comment(config))
        fh.write("t,x\n")
        for t, x in enumerate(values, start=1):
            fh.write(f"{t},{format_float(x)}\n")


def read_series_csv(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("t,"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValidationError(f"malformed series row: {line!r}")
            values.append(float(parts[1]))
    if not values:
        raise ValidationError(f"no data rows found in {path}")
    return np.array(values)
