"""One-tailed Wilcoxon tests and box-plot style summaries."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

ALTERNATIVES = ("greater", "less")


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    z: float
    p_value: float
    degenerate: bool = False


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def rankdata(values: Sequence[float]) -> list[float]:
    """1-based ranks, ties receive the mean of the ranks they span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _tie_term(values: Sequence[float]) -> float:
    _, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return float(np.sum(counts**3 - counts))


def _tail(deviation: float, sd: float, alternative: str) -> float:
    # continuity correction of half a unit towards the null
    if alternative == "greater":
        return _normal_sf((deviation - 0.5) / sd)
    return _normal_sf(-(deviation + 0.5) / sd)


def wilcoxon_one_tailed(a: Sequence[float], b: Sequence[float], alternative: str = "greater") -> WilcoxonResult:
    """Rank-sum test of whether ``a`` tends to be greater (or less) than ``b``.

    Normal approximation to the Mann-Whitney U statistic of ``a``, with tie
    and continuity corrections.
    """
    if alternative not in ALTERNATIVES:
        raise InvalidInputError(f"alternative must be one of {ALTERNATIVES}")
    n1, n2 = len(a), len(b)
    if n1 < 3 or n2 < 3:
        raise InvalidInputError("both samples need at least 3 observations")
    pooled = list(a) + list(b)
    ranks = rankdata(pooled)
    u = sum(ranks[:n1]) - n1 * (n1 + 1) / 2
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1)))
    if var <= 0:
        return WilcoxonResult(u, 0.0, 0.5, degenerate=True)
    sd = math.sqrt(var)
    deviation = u - n1 * n2 / 2.0
    return WilcoxonResult(u, deviation / sd, _tail(deviation, sd, alternative))


def wilcoxon_signed_rank_one_tailed(a: Sequence[float], b: Sequence[float], alternative: str = "greater") -> WilcoxonResult:
    """Paired variant: signed-rank test on ``a - b`` (zero differences dropped)."""
    if alternative not in ALTERNATIVES:
        raise InvalidInputError(f"alternative must be one of {ALTERNATIVES}")
    if len(a) != len(b):
        raise InvalidInputError("paired samples must have equal length")
    if len(a) < 3:
        raise InvalidInputError("both samples need at least 3 observations")
    diffs = [x - y for x, y in zip(a, b) if x != y]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0.0, 0.0, 0.5, degenerate=True)
    ranks = rankdata([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term([abs(d) for d in diffs]) / 48.0
    if var <= 0:
        return WilcoxonResult(w_plus, 0.0, 0.5, degenerate=True)
    sd = math.sqrt(var)
    deviation = w_plus - n * (n + 1) / 4.0
    return WilcoxonResult(w_plus, deviation / sd, _tail(deviation, sd, alternative))


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    median: float
    sd: float
    lq: float
    uq: float
    mild_outliers: tuple[float, ...]
    extreme_outliers: tuple[float, ...]

    @property
    def iqr(self) -> float:
        return self.uq - self.lq


def summarize(sample: Sequence[float]) -> SampleSummary:
    """Descriptive statistics; outliers split at 1.5 and 3 interquartile ranges."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise InvalidInputError("cannot summarise an empty sample")
    lq, median, uq = (float(v) for v in np.percentile(x, [25, 50, 75]))
    iqr = uq - lq
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0

    def beyond(k: float) -> np.ndarray:
        return (x < lq - k * iqr) | (x > uq + k * iqr)

    extreme = beyond(3.0)
    mild = beyond(1.5) & ~extreme
    return SampleSummary(
        n=int(x.size), mean=float(x.mean()), median=median, sd=sd, lq=lq, uq=uq,
        mild_outliers=tuple(float(v) for v in x[mild]),
        extreme_outliers=tuple(float(v) for v in x[extreme]),
    )
