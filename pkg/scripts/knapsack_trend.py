"""Cross-run profit spread of scenario K against O on a generated knapsack set.

Runs one experiment per master seed and writes ``trend.csv`` with the
standard deviation of the test profit over repetitions for each scenario.
``--independent-streams`` gives every scenario its own GA random stream;
by default the scenarios share streams (paired comparison).
"""

import argparse
import csv
import logging
import time
from pathlib import Path

from hyperselect.domains.knapsack import generate_instances
from hyperselect.harness import ExperimentConfig, run_experiment

log = logging.getLogger("knapsack_trend")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--instances", type=int, default=200)
    parser.add_argument("--items", type=int, default=30)
    parser.add_argument("--instance-seed", type=int, default=2024)
    parser.add_argument("--masters", type=int, default=10)
    parser.add_argument("--repetitions", type=int, default=10)
    parser.add_argument("--scenarios", default="O,K")
    parser.add_argument("--independent-streams", action="store_true")
    parser.add_argument("--out", default="results/knapsack_trend")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    instances = generate_instances(args.instances, args.items, seed=args.instance_seed)
    scenarios = tuple(args.scenarios.split(","))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    t0 = time.perf_counter()
    for master in range(args.masters):
        cfg = ExperimentConfig(domain="knapsack", scenarios=scenarios, repetitions=args.repetitions, seed=master,
                               paired_seeds=not args.independent_streams, output=str(out / f"seed_{master}"))
        res = run_experiment(cfg, instances)
        sds = {sid: res.scenarios[sid].summaries["profit"].sd for sid in scenarios}
        means = {sid: res.scenarios[sid].summaries["profit"].mean for sid in scenarios}
        rows.append([master, *(sds[s] for s in scenarios), *(means[s] for s in scenarios)])
        log.info("seed %d: %s", master, "  ".join(f"{s} sd={sds[s]:.1f}" for s in scenarios))

    with open(out / "trend.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["master_seed", *(f"sd_{s}" for s in scenarios), *(f"mean_{s}" for s in scenarios)])
        writer.writerows(rows)
    if "O" in scenarios and "K" in scenarios:
        io, ik = scenarios.index("O") + 1, scenarios.index("K") + 1
        wins = sum(r[ik] <= r[io] for r in rows)
        ties = sum(r[ik] == r[io] for r in rows)
        print(f"sd_K <= sd_O in {wins}/{len(rows)} seeds ({ties} exact ties)")
    print(f"{time.perf_counter() - t0:.0f}s, table in {out / 'trend.csv'}")


if __name__ == "__main__":
    main()
