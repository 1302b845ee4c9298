import collections

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperselect.core import Rule, Selector
from hyperselect.domains.knapsack import KnapsackDomain, generate_instances
from hyperselect.domains.partition import EXAMPLE_INSTANCES, PartitionDomain, PartitionInstance
from hyperselect.errors import ConfigError, InvalidInputError
from hyperselect.ga import Fitness, GAConfig, crossover, evaluate, init_population, mutate, splice, train


def _rules(tags):
    return [Rule((float(t),), 0) for t in tags]


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [{"population_size": 1}, {"cycles": 0}, {"mutation_rate": 1.5}, {"crossover_rate": -0.1},
         {"min_rules": 0}, {"min_rules": 5, "max_rules": 4}, {"budget": 0}],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigError):
            GAConfig(**kwargs)

    def test_defaults(self):
        c = GAConfig()
        assert (c.population_size, c.crossover_rate, c.mutation_rate, c.cycles, c.min_rules, c.max_rules) == (20, 1.0, 0.1, 100, 2, 30)


class TestFitness:
    def test_minimise(self):
        assert Fitness(3, 0).better_than(Fitness(4, 0))

    def test_maximise(self):
        assert Fitness(4, 0, True).better_than(Fitness(3, 0, True))

    def test_equal_is_not_better(self):
        assert not Fitness(3, 1).better_than(Fitness(3, 0))


class TestOperators:
    @given(st.integers(1, 12), st.integers(1, 12), st.data())
    def test_splice_conserves_rules(self, n1, n2, data):
        p1, p2 = _rules(range(n1)), _rules(range(100, 100 + n2))
        c1 = data.draw(st.integers(0, n1))
        c2 = data.draw(st.integers(0, n2))
        a, b = splice(p1, p2, c1, c2)
        assert len(a) + len(b) == n1 + n2
        assert collections.Counter(a + b) == collections.Counter(p1 + p2)

    def test_splice_example(self):
        a, b = splice(_rules([1, 2, 3]), _rules([7, 8]), 1, 2)
        assert [r.condition[0] for r in a] == [1]
        assert [r.condition[0] for r in b] == [7, 8, 2, 3]

    @given(st.integers(0, 2**32 - 1))
    def test_crossover_children_respect_bounds(self, seed):
        rng = np.random.default_rng(seed)
        cfg = GAConfig(min_rules=2, max_rules=5)
        p1 = Selector(tuple(_rules(range(5))))
        p2 = Selector(tuple(_rules(range(10, 12))))
        for child in crossover(p1, p2, rng, cfg, 3):
            assert 2 <= len(child) <= 5

    def test_init_population_sizes(self, rng):
        cfg = GAConfig(population_size=50, min_rules=3, max_rules=7)
        pop = init_population(cfg, 4, 3, rng)
        assert len(pop) == 50
        for sel in pop:
            assert 3 <= len(sel) <= 7
            assert all(0 <= r.action < 3 and len(r.condition) == 4 for r in sel.rules)
            assert all(0 <= v < 1 for r in sel.rules for v in r.condition)

    def test_mutation_rate_zero_is_identity(self, rng):
        sel = init_population(GAConfig(), 3, 4, rng)[0]
        assert mutate(sel, 0.0, rng, 4) == sel

    def test_full_mutation_changes_one_field_per_rule(self, rng):
        sel = init_population(GAConfig(min_rules=30), 3, 4, rng)[0]
        out = mutate(sel, 1.0, rng, 4)
        for old, new in zip(sel.rules, out.rules):
            changed_cond = sum(a != b for a, b in zip(old.condition, new.condition))
            assert changed_cond <= 1
            if changed_cond:
                assert new.action == old.action
            assert all(0.0 <= v <= 1.0 for v in new.condition)

    def test_mutation_rate_validated(self, rng):
        with pytest.raises(InvalidInputError):
            mutate(Selector(tuple(_rules([0]))), 2.0, rng, 2)


class TestTraining:
    insts = [PartitionInstance(items) for items in EXAMPLE_INSTANCES]

    def test_deterministic_for_seed(self):
        cfg = GAConfig(cycles=30, seed=4)
        a = train(cfg, PartitionDomain(), self.insts)
        b = train(cfg, PartitionDomain(), self.insts)
        assert a.best == b.best and a.history == b.history

    def test_best_fitness_never_worsens(self):
        res = train(GAConfig(cycles=40, seed=1), KnapsackDomain(), generate_instances(4, 12, seed=2))
        best = [h.best_fitness for h in res.history]
        assert best == sorted(best)
        assert evaluate(res.best, generate_instances(4, 12, seed=2), KnapsackDomain()).total == res.fitness.total

    def test_finds_perfect_partition_selector(self):
        res = train(GAConfig(cycles=100, seed=0), PartitionDomain(), self.insts)
        assert res.fitness.total == 1  # the smallest reachable total quality

    def test_write_log(self, tmp_path):
        res = train(GAConfig(cycles=5, seed=0), PartitionDomain(), self.insts)
        res.write_log(tmp_path / "log.csv")
        lines = (tmp_path / "log.csv").read_text().splitlines()
        assert lines[0] == "cycle,best_fitness,mean_fitness,best_rule_count"
        assert len(lines) == 6

    def test_empty_training_set(self):
        with pytest.raises(InvalidInputError):
            train(GAConfig(cycles=1), PartitionDomain(), [])
