"""Kernel functions and the distance they induce in feature space.

The kernel distance expands the squared Euclidean distance in the mapped
space, ``K(a, a) - 2 K(a, b) + K(b, b)``, so it can be computed without ever
building the mapping. With the linear kernel it reduces to the ordinary
squared Euclidean distance.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

KERNEL_KINDS = ("linear", "polynomial", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    d: int = 2
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise InvalidInputError("rbf kernel needs gamma > 0")
        if self.kind == "polynomial" and self.d < 1:
            raise InvalidInputError("polynomial kernel needs degree >= 1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "d": self.d, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data: dict) -> KernelSpec:
        return cls(kind=data["kind"], d=int(data.get("d", 2)), gamma=float(data.get("gamma", 1.0)))


def _pair(x1: Sequence[float], x2: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise InvalidInputError(f"vectors of different length: {a.size} vs {b.size}")
    return a, b


def kernel_eval(spec: KernelSpec, x1: Sequence[float], x2: Sequence[float]) -> float:
    a, b = _pair(x1, x2)
    if spec.kind == "linear":
        return float(a @ b)
    if spec.kind == "polynomial":
        return float((a @ b + 1.0) ** spec.d)
    diff = a - b
    return math.exp(-spec.gamma * float(diff @ diff))


def kernel_distance_sq(spec: KernelSpec, x1: Sequence[float], x2: Sequence[float]) -> float:
    """Squared distance between the implicitly mapped points (never negative)."""
    a, b = _pair(x1, x2)
    if spec.kind == "rbf":
        # K(x, x) = 1 for rbf
        d2 = 2.0 - 2.0 * kernel_eval(spec, a, b)
    else:
        d2 = kernel_eval(spec, a, a) - 2.0 * kernel_eval(spec, a, b) + kernel_eval(spec, b, b)
    return max(d2, 0.0)


def default_gamma(n_features: int) -> float:
    if n_features < 1:
        raise InvalidInputError(f"feature count must be >= 1, got {n_features}")
    return 1.0 / n_features


class EuclideanMetric:
    """Plain Euclidean distance, with a batched form for rule matching."""

    def __call__(self, x1: Sequence[float], x2: Sequence[float]) -> float:
        a, b = _pair(x1, x2)
        return float(np.sqrt(np.sum((a - b) ** 2)))

    def distances(self, query: np.ndarray, points: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum((points - query) ** 2, axis=1))

    def __repr__(self) -> str:
        return "EuclideanMetric()"


class KernelMetric:
    """Kernel-induced squared distance used in place of the Euclidean one."""

    def __init__(self, spec: KernelSpec):
        self.spec = spec

    def __call__(self, x1: Sequence[float], x2: Sequence[float]) -> float:
        return kernel_distance_sq(self.spec, x1, x2)

    def distances(self, query: np.ndarray, points: np.ndarray) -> np.ndarray:
        spec = self.spec
        if spec.kind == "rbf":
            sq = np.sum((points - query) ** 2, axis=1)
            d2 = 2.0 - 2.0 * np.exp(-spec.gamma * sq)
        elif spec.kind == "linear":
            d2 = query @ query - 2.0 * (points @ query) + np.einsum("ij,ij->i", points, points)
        else:
            k_qq = (query @ query + 1.0) ** spec.d
            k_qp = (points @ query + 1.0) ** spec.d
            k_pp = (np.einsum("ij,ij->i", points, points) + 1.0) ** spec.d
            d2 = k_qq - 2.0 * k_qp + k_pp
        return np.maximum(d2, 0.0)

    def __repr__(self) -> str:
        return f"KernelMetric({self.spec!r})"


def pairwise_matrix(points: Sequence[Sequence[float]], metric: Callable[[Sequence[float], Sequence[float]], float]) -> np.ndarray:
    """Symmetric matrix of ``metric`` over every pair of points."""
    if len(points) < 1:
        raise InvalidInputError("pairwise matrix needs at least one point")
    width = len(points[0])
    if any(len(p) != width for p in points):
        raise InvalidInputError("points have different lengths")
    n = len(points)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = metric(points[i], points[j])
    return out
