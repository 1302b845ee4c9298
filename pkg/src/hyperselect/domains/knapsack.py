"""0/1 knapsack as a constructive domain.

Items are packed one at a time. After each packing the candidate list is
refiltered to the unpacked items that still fit, and the rollout ends when
no candidate is left. Features describe the candidate items only, and each
one is normalised by maxima taken over those same candidates.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import DomainAdapter, SolveOutcome
from ..errors import InvalidInputError, ParseError

GENERATOR_CLASSES = ("uncorrelated", "weakly", "strongly", "inverse_strongly", "almost_strongly", "subset_sum")


@dataclass(frozen=True)
class KnapsackInstance:
    capacity: int
    profits: tuple[int, ...]
    weights: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if len(self.profits) != len(self.weights):
            raise InvalidInputError("profits and weights differ in length")
        if self.capacity < 0:
            raise InvalidInputError("capacity must be non-negative")
        if any(p <= 0 for p in self.profits) or any(w <= 0 for w in self.weights):
            raise InvalidInputError("profits and weights must be positive")

    @property
    def items(self) -> list[tuple[int, int]]:
        return list(zip(self.profits, self.weights))

    @classmethod
    def from_items(cls, capacity: int, items: Sequence[tuple[int, int]], name: str = "") -> KnapsackInstance:
        return cls(capacity, tuple(int(p) for p, _ in items), tuple(int(w) for _, w in items), name)


@dataclass
class PackingState:
    instance: KnapsackInstance
    remaining: int
    candidates: list[int]
    packed: list[int] = field(default_factory=list)
    profit: int = 0


def initial_state(instance: KnapsackInstance) -> PackingState:
    fits = [i for i, w in enumerate(instance.weights) if w <= instance.capacity]
    return PackingState(instance, instance.capacity, fits)


def _moments(values: list[int]) -> tuple[float, float, float, float]:
    n = len(values)
    mean = sum(values) / n
    ordered = sorted(values)
    mid = n // 2
    median = ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, median, math.sqrt(var), ordered[-1]


def compute_features(state: PackingState) -> list[float]:
    """mean, median and std of profit, the same for weight, then shifted correlation."""
    if not state.candidates:
        return [0.0] * 6 + [0.5]
    profits = [state.instance.profits[i] for i in state.candidates]
    weights = [state.instance.weights[i] for i in state.candidates]
    p_mean, p_med, p_sd, p_max = _moments(profits)
    w_mean, w_med, w_sd, w_max = _moments(weights)
    if p_sd == 0 or w_sd == 0:
        r = 0.0
    else:
        cov = sum((p - p_mean) * (w - w_mean) for p, w in zip(profits, weights)) / len(profits)
        r = max(-1.0, min(1.0, cov / (p_sd * w_sd)))
    return [
        p_mean / p_max, p_med / p_max, p_sd / p_max,
        w_mean / w_max, w_med / w_max, w_sd / w_max,
        (r + 1.0) / 2.0,
    ]


def heuristic_max_profit(state: PackingState) -> int:
    profits = state.instance.profits
    best = state.candidates[0]
    for i in state.candidates:
        if profits[i] > profits[best]:
            best = i
    return best


def heuristic_min_weight(state: PackingState) -> int:
    weights = state.instance.weights
    best = state.candidates[0]
    for i in state.candidates:
        if weights[i] < weights[best]:
            best = i
    return best


def heuristic_best_ratio(state: PackingState) -> int:
    p, w = state.instance.profits, state.instance.weights
    best = state.candidates[0]
    for i in state.candidates:
        # integer cross-multiplication keeps exact ratio ties
        if p[i] * w[best] > p[best] * w[i]:
            best = i
    return best


def heuristic_default_order(state: PackingState) -> int:
    return state.candidates[0]


HEURISTICS = (heuristic_max_profit, heuristic_min_weight, heuristic_best_ratio, heuristic_default_order)


def apply_pack(state: PackingState, item: int) -> PackingState:
    if item not in state.candidates:
        raise InvalidInputError(f"item {item} is not a packing candidate")
    inst = state.instance
    state.packed.append(item)
    state.profit += inst.profits[item]
    state.remaining -= inst.weights[item]
    state.candidates = [i for i in state.candidates if i != item and inst.weights[i] <= state.remaining]
    return state


def total_profit(outcomes: Sequence[SolveOutcome]) -> float:
    return float(sum(o.objective for o in outcomes))


class KnapsackDomain(DomainAdapter):
    name = "knapsack"
    feature_names = ("p_mean", "p_median", "p_std", "w_mean", "w_median", "w_std", "pw_corr")
    heuristic_names = ("MAXP", "MINW", "MAXPW", "DEF")
    maximize = True
    default_budget = 10**6
    report_metrics = (("profit", True),)

    def initial_state(self, instance: KnapsackInstance) -> PackingState:
        return initial_state(instance)

    def features(self, state: PackingState) -> list[float]:
        return compute_features(state)

    def apply(self, state: PackingState, action: int) -> PackingState:
        return apply_pack(state, HEURISTICS[action](state))

    def finished(self, state: PackingState) -> bool:
        return not state.candidates

    def objective(self, state: PackingState) -> float:
        return state.profit

    def metrics(self, outcomes: Sequence[SolveOutcome]) -> dict[str, float]:
        return {"profit": total_profit(outcomes)}


def parse_knapsack(text: str, name: str = "") -> KnapsackInstance:
    """Parse ``n``, ``capacity`` and then ``n`` lines of ``profit weight``.

    Blank lines and ``#`` comments are skipped. Item lines may carry a
    leading index column (three numbers) and may be comma separated.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].replace(",", " ").split()
        if body:
            lines.append((lineno, body))
    if len(lines) < 2:
        raise ParseError("knapsack text needs an item count and a capacity")

    def as_int(lineno: int, token: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise ParseError(f"line {lineno}: expected an integer, got {token!r}") from None

    (ln_n, head), (ln_c, cap) = lines[0], lines[1]
    if len(head) == 2:
        # "n capacity" on a single line
        n, capacity = as_int(ln_n, head[0]), as_int(ln_n, head[1])
        item_lines = lines[1:]
    else:
        if len(head) != 1 or len(cap) != 1:
            raise ParseError(f"line {ln_n}: expected the item count and capacity on separate lines")
        n, capacity = as_int(ln_n, head[0]), as_int(ln_c, cap[0])
        item_lines = lines[2:]
    if n < 0 or capacity < 0:
        raise ParseError(f"line {ln_n}: item count and capacity must be non-negative")
    if len(item_lines) != n:
        raise ParseError(f"expected {n} item lines, found {len(item_lines)}")
    items = []
    for lineno, body in item_lines:
        if len(body) == 3:
            body = body[1:]
        if len(body) != 2:
            raise ParseError(f"line {lineno}: expected 'profit weight'")
        p, w = as_int(lineno, body[0]), as_int(lineno, body[1])
        if p <= 0 or w <= 0:
            raise ParseError(f"line {lineno}: profit and weight must be positive")
        items.append((p, w))
    return KnapsackInstance.from_items(capacity, items, name)


def format_knapsack(instance: KnapsackInstance) -> str:
    rows = [str(len(instance.profits)), str(instance.capacity)]
    rows += [f"{p} {w}" for p, w in instance.items]
    return "\n".join(rows) + "\n"


def parse_pisinger_archive(text: str) -> list[KnapsackInstance]:
    """Parse the multi-instance CSV archives (name, n, c, z, time, ``i,p,w,x`` rows, ``-----``)."""
    instances = []
    name, capacity, items = "", None, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("-----"):
            if capacity is None:
                raise ParseError(f"line {lineno}: instance {name!r} has no capacity")
            instances.append(KnapsackInstance.from_items(capacity, items, name))
            name, capacity, items = "", None, []
            continue
        parts = line.split()
        if "," in line:
            cols = line.split(",")
            try:
                p, w = int(cols[1]), int(cols[2])
            except (IndexError, ValueError):
                raise ParseError(f"line {lineno}: malformed item row") from None
            if p <= 0 or w <= 0:
                raise ParseError(f"line {lineno}: profit and weight must be positive")
            items.append((p, w))
        elif parts[0] == "c" and len(parts) == 2:
            capacity = int(parts[1])
        elif parts[0] in ("n", "z", "time"):
            continue
        else:
            name = line
    if items or capacity is not None:
        if capacity is None:
            raise ParseError(f"instance {name!r} has no capacity")
        instances.append(KnapsackInstance.from_items(capacity, items, name))
    return instances


def load_knapsack_instances(path: str | Path) -> list[KnapsackInstance]:
    """Load a single-instance text file, a Pisinger archive, or every ``*.txt``/``*.csv`` in a directory."""
    path = Path(path)
    if path.is_dir():
        out = []
        for child in sorted(path.iterdir()):
            if child.suffix in (".txt", ".csv", ".kp"):
                out.extend(load_knapsack_instances(child))
        return out
    text = path.read_text()
    try:
        if "-----" in text or "," in text.split("\n", 1)[0] or text.lstrip().startswith("knapPI"):
            return parse_pisinger_archive(text)
        return [parse_knapsack(text, name=path.stem)]
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def generate_instance(n_items: int, kind: str, rng: np.random.Generator, R: int = 1000, name: str = "") -> KnapsackInstance:
    """Draw one instance of a classic correlation class.

    Capacity is ``h / 101`` of the total weight with ``h`` uniform in 1..100.
    """
    if kind not in GENERATOR_CLASSES:
        raise InvalidInputError(f"unknown instance class {kind!r}")
    if n_items < 1:
        raise InvalidInputError("an instance needs at least one item")
    w = rng.integers(1, R + 1, size=n_items)
    if kind == "uncorrelated":
        p = rng.integers(1, R + 1, size=n_items)
    elif kind == "weakly":
        lo = np.maximum(1, w - R // 10)
        p = rng.integers(lo, w + R // 10 + 1)
    elif kind == "strongly":
        p = w + R // 10
    elif kind == "inverse_strongly":
        p = rng.integers(1, R + 1, size=n_items)
        w = p + R // 10
    elif kind == "almost_strongly":
        p = rng.integers(w + R // 10 - R // 500, w + R // 10 + R // 500 + 1)
    else:
        p = w.copy()
    h = int(rng.integers(1, 101))
    capacity = max(1, int(h * int(w.sum()) // 101))
    return KnapsackInstance(capacity, tuple(int(x) for x in p), tuple(int(x) for x in w), name)


def generate_instances(count: int, n_items: int, kinds: Sequence[str] = ("uncorrelated", "weakly", "strongly"),
                       seed: int = 0, R: int = 1000) -> list[KnapsackInstance]:
    """Seeded instance set cycling through ``kinds``."""
    rng = np.random.default_rng(seed)
    return [
        generate_instance(n_items, kinds[k % len(kinds)], rng, R, name=f"{kinds[k % len(kinds)]}_{n_items}_{k}")
        for k in range(count)
    ]
