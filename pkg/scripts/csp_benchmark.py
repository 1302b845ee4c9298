"""Generate a random binary CSP set and run the scenario matrix on it.

Instances are written as canonical JSON so the same set can be fed to the
``hyperselect`` command line afterwards.
"""

import argparse
import json
import logging
from pathlib import Path

import numpy as np

from hyperselect.domains.csp import random_csp
from hyperselect.ga import GAConfig
from hyperselect.harness import ExperimentConfig, markdown_summary, run_experiment
from hyperselect.domains import get_domain


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=120)
    parser.add_argument("--variables", type=int, default=14)
    parser.add_argument("--values", type=int, default=5)
    parser.add_argument("--density", type=float, default=0.5)
    parser.add_argument("--tightness", type=float, nargs=2, default=(0.25, 0.45), metavar=("LO", "HI"))
    parser.add_argument("--scenarios", default="O,L,S,K,K+S")
    parser.add_argument("--repetitions", type=int, default=5)
    parser.add_argument("--cycles", type=int, default=50)
    parser.add_argument("--budget", type=float, default=2e5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/csp_benchmark")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    inst_dir = out / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    instances = []
    for k in range(args.count):
        t = float(rng.uniform(*args.tightness))
        inst = random_csp(args.variables, args.values, args.density, t, rng, name=f"rand_{k:03d}")
        (inst_dir / f"{inst.name}.json").write_text(json.dumps(inst.to_dict()) + "\n")
        instances.append(inst)

    cfg = ExperimentConfig(domain="csp", scenarios=tuple(args.scenarios.split(",")), repetitions=args.repetitions,
                           ga=GAConfig(cycles=args.cycles), budget=args.budget, seed=args.seed,
                           output=str(out / "report"))
    res = run_experiment(cfg, instances, progress=logging.getLogger("csp").info)
    print(markdown_summary(res, get_domain("csp")))


if __name__ == "__main__":
    main()
