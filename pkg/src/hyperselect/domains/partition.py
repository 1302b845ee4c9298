"""Two-subset number partitioning, a toy domain with hand-checkable answers.

All items start in subset 1. A heuristic moves one item to subset 2, and the
rollout stops once subset 2 holds at least half of the total value. The
quality of the split is the absolute difference between the subset sums.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from ..core import DomainAdapter, SolveOutcome
from ..errors import DomainError, ParseError

EXAMPLE_INSTANCES = (
    (10, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1),
    (10, 9, 8, 1, 1, 2, 2, 1, 1, 1, 1, 1, 1),
    (10, 3, 4, 2, 10, 10, 1, 1, 1, 1, 1, 1, 1),
)


@dataclass(frozen=True)
class PartitionInstance:
    items: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(int(i) for i in self.items))
        if not self.items:
            raise ParseError("partition instance needs at least one item")
        if any(i <= 0 for i in self.items):
            raise ParseError("partition items must be positive")


@dataclass
class PartitionState:
    subset1: list[int]
    subset2: list[int] = field(default_factory=list)

    @property
    def sum1(self) -> int:
        return sum(self.subset1)

    @property
    def sum2(self) -> int:
        return sum(self.subset2)


def quality(state: PartitionState) -> int:
    return abs(state.sum1 - state.sum2)


def feature_f1(state: PartitionState) -> float:
    """Share of the total value already moved to subset 2."""
    s2 = state.sum2
    return s2 / (state.sum1 + s2)


def finished(state: PartitionState) -> bool:
    return 2 * state.sum2 >= state.sum1 + state.sum2


def heuristic_max_load(state: PartitionState) -> int:
    """Position in subset 1 of its largest item (first occurrence)."""
    return max(range(len(state.subset1)), key=lambda i: (state.subset1[i], -i))


def heuristic_min_load(state: PartitionState) -> int:
    return min(range(len(state.subset1)), key=lambda i: (state.subset1[i], i))


HEURISTICS = (heuristic_max_load, heuristic_min_load)


def move(state: PartitionState, position: int) -> PartitionState:
    state.subset2.append(state.subset1.pop(position))
    return state


class PartitionDomain(DomainAdapter):
    name = "partition"
    feature_names = ("F1",)
    heuristic_names = ("MAX", "MIN")
    maximize = False
    default_budget = 10**6
    report_metrics = (("Q", False),)

    def initial_state(self, instance: PartitionInstance) -> PartitionState:
        return PartitionState(list(instance.items))

    def features(self, state: PartitionState) -> list[float]:
        return [feature_f1(state)]

    def apply(self, state: PartitionState, action: int) -> PartitionState:
        if not state.subset1:
            raise DomainError("no item left to move")
        return move(state, HEURISTICS[action](state))

    def finished(self, state: PartitionState) -> bool:
        return finished(state)

    def objective(self, state: PartitionState) -> float:
        return quality(state)

    def metrics(self, outcomes: Sequence[SolveOutcome]) -> dict[str, float]:
        return {"Q": float(sum(o.objective for o in outcomes))}


def load_partition_instances(path: str | Path) -> list[PartitionInstance]:
    """Read one JSON integer array, or an array of them."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path}: expected a JSON array")
    try:
        if all(isinstance(x, int) for x in data):
            return [PartitionInstance(tuple(data))]
        if all(isinstance(x, list) for x in data):
            return [PartitionInstance(tuple(x)) for x in data]
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    raise ParseError(f"{path}: expected an integer array or an array of integer arrays")
