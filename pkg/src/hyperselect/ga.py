"""Steady-state messy genetic algorithm over selectors.

Chromosomes are variable-length rule lists. Crossover cuts each parent at
an independent point and splices the pieces cross-wise, so children may be
longer or shorter than their parents; lengths are then clamped back into
``[min_rules, max_rules]``.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import DomainAdapter, Metric, Rule, Selector, solve_instance
from .errors import ConfigError, HyperSelectError, InvalidInputError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 20
    crossover_rate: float = 1.0
    mutation_rate: float = 0.1
    cycles: int = 100
    min_rules: int = 2
    max_rules: int = 30
    sigma: float = 0.1
    seed: int = 0
    budget: float | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.crossover_rate <= 1 and 0 <= self.mutation_rate <= 1):
            raise ConfigError("crossover and mutation rates must lie in [0, 1]")
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.cycles < 1:
            raise ConfigError("cycles must be at least 1")
        if not 1 <= self.min_rules <= self.max_rules:
            raise ConfigError("need 1 <= min_rules <= max_rules")
        if self.budget is not None and not self.budget > 0:
            raise ConfigError("budget must be positive")


@dataclass(frozen=True)
class Fitness:
    total: float
    solved: int
    maximize: bool = False

    @property
    def score(self) -> float:
        """Lower is better regardless of direction."""
        return -self.total if self.maximize else self.total

    def better_than(self, other: Fitness) -> bool:
        return self.score < other.score


@dataclass(frozen=True)
class CycleLog:
    cycle: int
    best_fitness: float
    mean_fitness: float
    best_rule_count: int


@dataclass
class TrainingResult:
    best: Selector
    fitness: Fitness
    history: list[CycleLog] = field(default_factory=list)

    def write_log(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["cycle", "best_fitness", "mean_fitness", "best_rule_count"])
            writer.writeheader()
            for row in self.history:
                writer.writerow(asdict(row))


def random_rule(rng: np.random.Generator, feature_count: int, heuristic_count: int) -> Rule:
    return Rule(tuple(rng.random(feature_count)), int(rng.integers(heuristic_count)))


def init_population(config: GAConfig, feature_count: int, heuristic_count: int,
                    rng: np.random.Generator) -> list[Selector]:
    population = []
    for _ in range(config.population_size):
        size = int(rng.integers(config.min_rules, config.max_rules + 1))
        population.append(Selector(tuple(random_rule(rng, feature_count, heuristic_count) for _ in range(size))))
    return population


def splice(p1: Sequence[Rule], p2: Sequence[Rule], cut1: int, cut2: int) -> tuple[list[Rule], list[Rule]]:
    """Cut-and-splice without any length repair."""
    return list(p1[:cut1]) + list(p2[cut2:]), list(p2[:cut2]) + list(p1[cut1:])


def _clamp(rules: list[Rule], config: GAConfig, feature_count: int, heuristic_count: int,
           rng: np.random.Generator) -> Selector:
    rules = rules[: config.max_rules]
    while len(rules) < config.min_rules:
        rules.append(random_rule(rng, feature_count, heuristic_count))
    return Selector(tuple(rules))


def crossover(parent1: Selector, parent2: Selector, rng: np.random.Generator, config: GAConfig,
              heuristic_count: int) -> tuple[Selector, Selector]:
    cut1 = int(rng.integers(0, len(parent1) + 1))
    cut2 = int(rng.integers(0, len(parent2) + 1))
    c1, c2 = splice(parent1.rules, parent2.rules, cut1, cut2)
    m = parent1.feature_count
    return (_clamp(c1, config, m, heuristic_count, rng),
            _clamp(c2, config, m, heuristic_count, rng))


def mutate(selector: Selector, rate: float, rng: np.random.Generator, heuristic_count: int,
           sigma: float = 0.1) -> Selector:
    """Per rule, with probability ``rate``: nudge one condition value or redraw the action."""
    if not 0 <= rate <= 1:
        raise InvalidInputError("mutation rate must lie in [0, 1]")
    rules = []
    for rule in selector.rules:
        if rng.random() < rate:
            if rng.random() < 0.5:
                cond = list(rule.condition)
                j = int(rng.integers(len(cond)))
                cond[j] = min(1.0, max(0.0, cond[j] + rng.normal(0.0, sigma)))
                rule = Rule(tuple(cond), rule.action)
            else:
                rule = Rule(rule.condition, int(rng.integers(heuristic_count)))
        rules.append(rule)
    return Selector(tuple(rules))


def evaluate(selector: Selector, instances: Sequence[Any], domain: DomainAdapter, transform: Any = None,
             metric: Metric | None = None, budget: float | None = None) -> Fitness:
    """Summed training objective of ``selector`` over ``instances``."""
    if not instances:
        raise InvalidInputError("evaluation needs at least one training instance")
    budget = domain.default_budget if budget is None else budget
    worst = 0.0 if domain.maximize else budget
    total, solved = 0.0, 0
    for instance in instances:
        try:
            outcome = solve_instance(selector, instance, domain, transform, metric, budget)
        except HyperSelectError as exc:
            log.debug("solve failed, charging worst-case fitness: %s", exc)
            total += worst
            continue
        total += domain.fitness_value(outcome, budget)
        solved += outcome.solved
    return Fitness(total, solved, domain.maximize)


def train(config: GAConfig, domain: DomainAdapter, instances: Sequence[Any], transform: Any = None,
          metric: Metric | None = None) -> TrainingResult:
    if not instances:
        raise InvalidInputError("training needs at least one instance")
    rng = np.random.default_rng(config.seed)
    m, h = domain.feature_count, domain.heuristic_count

    def fitness_of(sel: Selector) -> Fitness:
        return evaluate(sel, instances, domain, transform, metric, config.budget)

    population = init_population(config, m, h, rng)
    fits = [fitness_of(s) for s in population]
    best_i = min(range(len(fits)), key=lambda i: fits[i].score)
    best, best_fit = population[best_i], fits[best_i]

    def tournament() -> int:
        i, j = (int(x) for x in rng.integers(len(population), size=2))
        return j if fits[j].better_than(fits[i]) else i

    history = []
    for cycle in range(1, config.cycles + 1):
        a, b = population[tournament()], population[tournament()]
        if rng.random() < config.crossover_rate:
            a, b = crossover(a, b, rng, config, h)
        children = [mutate(c, config.mutation_rate, rng, h, config.sigma) for c in (a, b)]
        scored = sorted(((fitness_of(c), c) for c in children), key=lambda fc: fc[0].score)
        worst_two = sorted(range(len(fits)), key=lambda i: (-fits[i].score, i))[:2]
        for (fit, child), slot in zip(scored, worst_two):
            if fit.better_than(fits[slot]):
                population[slot], fits[slot] = child, fit
            if fit.better_than(best_fit):
                best, best_fit = child, fit
        history.append(CycleLog(cycle, best_fit.total, float(np.mean([f.total for f in fits])), len(best)))
        log.debug("cycle %d best %.6g", cycle, best_fit.total)
    return TrainingResult(best, best_fit, history)
