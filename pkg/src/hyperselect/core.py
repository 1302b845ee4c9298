"""Selector representation, nearest-rule dispatch and the instance-solving loop.

A selector is an ordered list of rules. Each rule pairs a point in feature
space (its condition) with the index of a low-level heuristic. While an
instance is being solved, the current problem state is summarised as a
feature vector, the closest rule is found and its heuristic is applied. The
process repeats until the domain reports the instance as finished or the
cost budget is exhausted.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .errors import DomainError, InvalidInputError
from .kernels import EuclideanMetric

Metric = Callable[[Sequence[float], Sequence[float]], float]

EUCLIDEAN = EuclideanMetric()


@dataclass(frozen=True)
class Rule:
    condition: tuple[float, ...]
    action: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "condition", tuple(float(c) for c in self.condition))
        if self.action < 0:
            raise InvalidInputError(f"negative action index {self.action}")


@dataclass(frozen=True)
class Selector:
    """Ordered rule list; the evolved individual."""

    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise InvalidInputError("a selector needs at least one rule")
        width = len(self.rules[0].condition)
        if any(len(r.condition) != width for r in self.rules):
            raise InvalidInputError("rule conditions have different lengths")

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def feature_count(self) -> int:
        return len(self.rules[0].condition)

    @cached_property
    def conditions(self) -> np.ndarray:
        return np.array([r.condition for r in self.rules], dtype=float)

    @cached_property
    def actions(self) -> tuple[int, ...]:
        return tuple(r.action for r in self.rules)

    @classmethod
    def single(cls, action: int, feature_count: int, point: float = 0.0) -> Selector:
        return cls((Rule((point,) * feature_count, action),))

    def to_dict(self) -> dict[str, Any]:
        return {"rules": [{"condition": list(r.condition), "action": r.action} for r in self.rules]}

    def to_json(self) -> str:
        # repr-based float formatting in json round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Selector:
        try:
            rules = [Rule(tuple(r["condition"]), int(r["action"])) for r in data["rules"]]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed selector document: {exc}") from exc
        return cls(tuple(rules))

    @classmethod
    def from_json(cls, text: str) -> Selector:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SolveOutcome:
    solved: bool
    steps: int
    cost: float
    objective: float
    timed_out: bool
    actions: tuple[int, ...] = field(default=(), repr=False)


class DomainAdapter(ABC):
    """Uniform interface each problem domain implements.

    States are private to one run: ``initial_state`` must return a fresh
    object, and ``apply`` may update it in place.
    """

    name: str = "domain"
    feature_names: tuple[str, ...] = ()
    heuristic_names: tuple[str, ...] = ()
    maximize: bool = False
    default_budget: float = 10**6

    @property
    def feature_count(self) -> int:
        return len(self.feature_names)

    @property
    def heuristic_count(self) -> int:
        return len(self.heuristic_names)

    def actions(self) -> tuple[str, ...]:
        return self.heuristic_names

    @abstractmethod
    def initial_state(self, instance: Any) -> Any: ...

    @abstractmethod
    def features(self, state: Any) -> Sequence[float]: ...

    @abstractmethod
    def apply(self, state: Any, action: int) -> Any: ...

    @abstractmethod
    def finished(self, state: Any) -> bool: ...

    @abstractmethod
    def objective(self, state: Any) -> float: ...

    def cost(self, state: Any, steps: int) -> float:
        return steps

    def fitness_value(self, outcome: SolveOutcome, budget: float) -> float:
        """Per-instance contribution to the training objective."""
        return outcome.objective

    def outcome_key(self, outcome: SolveOutcome) -> tuple:
        """Sort key where smaller is better; completed runs come first."""
        value = -outcome.objective if self.maximize else outcome.objective
        return (not outcome.solved, value)

    def metrics(self, outcomes: Sequence[SolveOutcome]) -> dict[str, float]:
        return {"objective": float(sum(o.objective for o in outcomes))}

    # name of the headline metric and whether larger values are better
    report_metrics: tuple[tuple[str, bool], ...] = (("objective", False),)


def select_action(selector: Selector, features: Sequence[float], metric: Metric | None = None) -> int:
    """Action of the rule closest to ``features``; the first rule wins ties."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 1 or x.shape[0] != selector.feature_count:
        raise InvalidInputError(
            f"feature vector of length {x.size} does not match rule conditions of length {selector.feature_count}"
        )
    if not np.isfinite(x).all():
        raise InvalidInputError("feature vector contains non-finite values")
    metric = EUCLIDEAN if metric is None else metric
    batch = getattr(metric, "distances", None)
    if batch is not None:
        dist = batch(x, selector.conditions)
        return selector.actions[int(np.argmin(dist))]
    best, best_d = 0, math.inf
    for i, rule in enumerate(selector.rules):
        d = metric(x, rule.condition)
        if d < best_d:
            best, best_d = i, d
    return selector.rules[best].action


def _rollout(policy: Callable[[Any], int], instance: Any, domain: DomainAdapter, budget: float) -> SolveOutcome:
    if not budget > 0:
        raise InvalidInputError(f"budget must be positive, got {budget}")
    state = domain.initial_state(instance)
    steps = 0
    actions: list[int] = []
    failed = False
    while not domain.finished(state) and domain.cost(state, steps) <= budget:
        action = policy(state)
        try:
            state = domain.apply(state, action)
        except DomainError:
            failed = True
            break
        steps += 1
        actions.append(action)
    cost = domain.cost(state, steps)
    timed_out = not failed and cost > budget
    solved = not failed and not timed_out and domain.finished(state)
    return SolveOutcome(
        solved=solved,
        steps=steps,
        cost=cost,
        objective=domain.objective(state),
        timed_out=timed_out,
        actions=tuple(actions),
    )


def solve_instance(
    selector: Selector,
    instance: Any,
    domain: DomainAdapter,
    transform: Any = None,
    metric: Metric | None = None,
    budget: float | None = None,
) -> SolveOutcome:
    """Solve one instance, letting the selector pick a heuristic before every action.

    ``transform`` is anything with an ``apply(features)`` method (normally a
    fitted TransformSpec); ``None`` leaves features untouched.
    """
    budget = domain.default_budget if budget is None else budget
    if selector.feature_count != domain.feature_count:
        raise InvalidInputError(
            f"selector uses {selector.feature_count} features, domain {domain.name} has {domain.feature_count}"
        )

    def policy(state: Any) -> int:
        x = domain.features(state)
        if transform is not None:
            x = transform.apply(x)
        return select_action(selector, x, metric)

    return _rollout(policy, instance, domain, budget)


def run_heuristic(heuristic: int, instance: Any, domain: DomainAdapter, budget: float | None = None) -> SolveOutcome:
    if not 0 <= heuristic < domain.heuristic_count:
        raise InvalidInputError(f"heuristic index {heuristic} out of range for {domain.name}")
    budget = domain.default_budget if budget is None else budget
    return _rollout(lambda state: heuristic, instance, domain, budget)


@dataclass(frozen=True)
class OracleResult:
    choices: tuple[int, ...]
    outcomes: tuple[SolveOutcome, ...]
    metrics: dict[str, float]


def synthetic_oracle(per_heuristic: Sequence[Sequence[SolveOutcome]], domain: DomainAdapter) -> OracleResult:
    """Pick, for every instance, the best outcome among the standalone heuristics.

    ``per_heuristic[h][i]`` is the outcome of heuristic ``h`` on instance
    ``i``. Ties go to the lowest heuristic index.
    """
    if not per_heuristic or not per_heuristic[0]:
        raise InvalidInputError("synthetic oracle needs at least one heuristic and one instance")
    n = len(per_heuristic[0])
    if any(len(row) != n for row in per_heuristic):
        raise InvalidInputError("every heuristic must be run on every instance")
    choices = []
    picked = []
    for i in range(n):
        best = min(range(len(per_heuristic)), key=lambda h: domain.outcome_key(per_heuristic[h][i]))
        choices.append(best)
        picked.append(per_heuristic[best][i])
    return OracleResult(tuple(choices), tuple(picked), domain.metrics(picked))
