"""Toy partition walk-through: standalone heuristics, the two-rule selector and a GA-trained one."""

import argparse

from hyperselect.core import Rule, Selector, run_heuristic, solve_instance
from hyperselect.domains.partition import EXAMPLE_INSTANCES, PartitionDomain, PartitionInstance
from hyperselect.ga import GAConfig, train


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--cycles", type=int, default=100)
    args = parser.parse_args()

    dom = PartitionDomain()
    insts = [PartitionInstance(items) for items in EXAMPLE_INSTANCES]
    hand = Selector((Rule((0.0,), 0), Rule((0.5,), 1)))

    print("instance  MAX  MIN  selector")
    for k, inst in enumerate(insts, 1):
        q = [run_heuristic(h, inst, dom).objective for h in (0, 1)]
        s = solve_instance(hand, inst, dom).objective
        print(f"{k:>8}  {q[0]:>3g}  {q[1]:>3g}  {s:>8g}")

    res = train(GAConfig(cycles=args.cycles, seed=args.seed), dom, insts)
    print(f"\ntrained selector (seed {args.seed}): total Q = {res.fitness.total:g}, {len(res.best)} rules")
    for rule in res.best.rules:
        print(f"  F1={rule.condition[0]:.3f} -> {dom.heuristic_names[rule.action]}")


if __name__ == "__main__":
    main()
