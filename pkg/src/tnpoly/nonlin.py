"""Scalar nonlinearities used by the sequence models."""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ValidationError


class Nonlinearity(str, enum.Enum):
    IDENTITY = "identity"
    TANH = "tanh"
    SIGMOID = "sigmoid"


def apply(f: Nonlinearity, x):
    if f is Nonlinearity.IDENTITY:
        return x
    if f is Nonlinearity.TANH:
        return np.tanh(x)
    if f is Nonlinearity.SIGMOID:
        return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))
    raise ValidationError(f"unknown nonlinearity {f!r}")


def derivative(f: Nonlinearity, x):
    """df/dx evaluated at x (same shape as x)."""
    if f is Nonlinearity.IDENTITY:
        return np.ones_like(np.asarray(x, dtype=float))
    if f is Nonlinearity.TANH:
        t = np.tanh(x)
        return 1.0 - t * t
    if f is Nonlinearity.SIGMOID:
        s = apply(Nonlinearity.SIGMOID, x)
        return s * (1.0 - s)
    raise ValidationError(f"unknown nonlinearity {f!r}")


def saturation_level(f: Nonlinearity, eps: float) -> float:
    """Smallest convenient argument at which f comes within eps of 1.

    Used by the delta-tensor construction: the returned value `a` satisfies
    1 - f(a) < eps. Raises if no finite argument can achieve that.
    """
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"saturation tolerance must lie in (0, 1), got {eps}")
    if f is Nonlinearity.IDENTITY:
        return 1.0
    if f is Nonlinearity.TANH:
        return math.atanh(1.0 - eps / 2.0)
    if f is Nonlinearity.SIGMOID:
        # logit(1 - eps/2)
        return math.log((2.0 - eps) / eps)
    raise ValidationError(f"no saturation level defined for {f!r}")


def parse(name: str) -> Nonlinearity:
    try:
        return Nonlinearity(name.lower())
    except ValueError:
        raise ValidationError(f"unknown nonlinearity {name!r}") from None
