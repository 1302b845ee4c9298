"""Explicit feature transformations.

The linear and S-shaped maps are centred on a per-feature midpoint ``M``
with half-width ``W`` fitted from the training data, so the observed range
of every feature is stretched over [0, 1]. The exponential map has no fitted
parameters and only a steepness ``K``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

TRANSFORM_KINDS = ("identity", "linear", "s_shaped", "exponential")
S_SLOPE = 6.0


def fit_bounds(matrix: Sequence[Sequence[float]]) -> list[tuple[float, float]]:
    """Midpoint and half-width of every column."""
    data = np.asarray(matrix, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidInputError("fit_bounds needs a non-empty 2-D matrix")
    if not np.isfinite(data).all():
        raise InvalidInputError("training features must be finite")
    hi = data.max(axis=0)
    lo = data.min(axis=0)
    return [(float((h + l) / 2), float((h - l) / 2)) for h, l in zip(hi, lo)]


def apply_linear(x: float, M: float, W: float) -> float:
    if W < 0:
        raise InvalidInputError("half-width must be non-negative")
    if W == 0:
        return 0.5
    return max(0.0, min(1.0, (x - M + W) / (2 * W)))


def apply_s_shaped(x: float, M: float, W: float) -> float:
    if W < 0:
        raise InvalidInputError("half-width must be non-negative")
    if W == 0:
        return 0.5
    z = S_SLOPE * (x - M) / W
    # same logistic written to avoid overflow on either tail
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def apply_exponential(x: float, K: float = 5.0) -> float:
    e = math.exp(-K * x)
    return 1.0 - 2.0 * (e - math.exp(-K)) / (1.0 + e)


@dataclass(frozen=True)
class TransformSpec:
    kind: str = "identity"
    params: tuple[tuple[float, float], ...] = ()
    K: float = 5.0

    def __post_init__(self) -> None:
        if self.kind not in TRANSFORM_KINDS:
            raise InvalidInputError(f"unknown transform kind {self.kind!r}")
        params = tuple((float(m), float(w)) for m, w in self.params)
        if any(w < 0 for _, w in params):
            raise InvalidInputError("half-widths must be non-negative")
        if self.kind in ("linear", "s_shaped") and not params:
            raise InvalidInputError(f"{self.kind} transform needs fitted parameters")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "_mid", np.array([m for m, _ in params]))
        object.__setattr__(self, "_half", np.array([w for _, w in params]))

    @classmethod
    def fit(cls, kind: str, matrix: Sequence[Sequence[float]], K: float = 5.0) -> TransformSpec:
        params = fit_bounds(matrix) if kind in ("linear", "s_shaped") else ()
        return cls(kind, tuple(params), K)

    def apply(self, v: Sequence[float]) -> Sequence[float]:
        if self.kind == "identity":
            return v
        x = np.asarray(v, dtype=float)
        if self.kind == "exponential":
            e = np.exp(-self.K * x)
            return 1.0 - 2.0 * (e - math.exp(-self.K)) / (1.0 + e)
        if x.shape != self._mid.shape:
            raise InvalidInputError(f"transform fitted on {self._mid.size} features, got {x.size}")
        flat = self._half == 0
        safe = np.where(flat, 1.0, self._half)
        if self.kind == "linear":
            y = np.clip((x - self._mid + safe) / (2 * safe), 0.0, 1.0)
        else:
            z = np.clip(S_SLOPE * (x - self._mid) / safe, -700.0, 700.0)
            y = 1.0 - 1.0 / (1.0 + np.exp(z))
        return np.where(flat, 0.5, y)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": [list(p) for p in self.params], "K": self.K}

    @classmethod
    def from_dict(cls, data: dict) -> TransformSpec:
        return cls(data["kind"], tuple(tuple(p) for p in data.get("params", [])), float(data.get("K", 5.0)))


def apply_spec(spec: TransformSpec, v: Sequence[float]) -> list[float]:
    return [float(y) for y in np.atleast_1d(spec.apply(v))] if spec.kind != "identity" else list(v)
