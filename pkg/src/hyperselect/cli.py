"""Command line entry point (``hyperselect <subcommand>``)."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .core import Selector
from .domains import DOMAINS, get_domain, load_instances
from .domains.knapsack import GENERATOR_CLASSES, format_knapsack, generate_instances
from .errors import HyperSelectError
from .ga import GAConfig, train

log = logging.getLogger("hyperselect")


def _scenario_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _load(args: argparse.Namespace) -> list:
    return [inst for p in args.instances for inst in load_instances(args.domain, p)]


def cmd_train(args: argparse.Namespace) -> int:
    domain = get_domain(args.domain)
    instances = _load(args)
    snapshots = harness.feature_snapshots(domain, instances, args.budget)
    scenario = harness.build_scenario(args.scenario, snapshots)
    config = GAConfig(cycles=args.cycles, population_size=args.population, min_rules=args.min_rules,
                      max_rules=args.max_rules, seed=args.seed, budget=args.budget)
    result = train(config, domain, instances, scenario.transform, scenario.metric)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "selector.json").write_text(result.best.to_json() + "\n")
    (out / "scenario.json").write_text(json.dumps(scenario.to_dict(), indent=2) + "\n")
    result.write_log(out / "training_log.csv")
    print(f"best training fitness {result.fitness.total:g} with {len(result.best)} rules -> {out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    domain = get_domain(args.domain)
    instances = _load(args)
    selector = Selector.from_json(Path(args.selector).read_text())
    scenario = harness.Scenario.from_dict(json.loads(Path(args.scenario_file).read_text()))
    outcomes = harness.evaluate_selector(selector, scenario, domain, instances, args.budget)
    for key, value in domain.metrics(outcomes).items():
        print(f"{key}\t{value:g}")
    if args.out:
        rows = [[i, int(o.solved), int(o.timed_out), o.steps, o.cost, o.objective] for i, o in enumerate(outcomes)]
        harness._write_csv(Path(args.out), ["instance", "solved", "timed_out", "steps", "cost", "objective"], rows)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    domain = get_domain(args.domain)
    instances = _load(args)
    base = harness.compute_baselines(domain, instances, args.budget)
    for solver, metrics in base.metrics.items():
        print(solver + "\t" + "\t".join(f"{k}={v:g}" for k, v in metrics.items()))
    if args.out:
        header = ["instance", *domain.heuristic_names, "oracle_choice"]
        rows = [
            [i, *(base.per_heuristic[h][i].objective for h in range(domain.heuristic_count)),
             domain.heuristic_names[base.oracle.choices[i]]]
            for i in range(len(instances))
        ]
        harness._write_csv(Path(args.out), header, rows)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.config:
        config = harness.ExperimentConfig.from_file(args.config)
    elif args.domain:
        config = harness.ExperimentConfig(domain=args.domain)
    else:
        raise HyperSelectError("experiment needs --config or --domain")
    overrides = {}
    for key in ("domain", "seed", "budget", "repetitions", "workers", "train_fraction"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.instances:
        overrides["instances"] = list(args.instances)
    if args.scenarios:
        overrides["scenarios"] = _scenario_list(args.scenarios)
    if args.out:
        overrides["output"] = args.out
    if args.vat:
        overrides["vat"] = True
    if args.independent_streams:
        overrides["paired_seeds"] = False
    if args.cycles is not None:
        overrides["ga"] = replace(config.ga, cycles=args.cycles)
    config = replace(config, **overrides)
    if not config.output:
        config = replace(config, output="results")
    result = harness.run_experiment(config, progress=log.info)
    print(harness.markdown_summary(result, get_domain(config.domain)))
    print(f"reports written to {config.output}")
    return 0


def cmd_vat(args: argparse.Namespace) -> int:
    domain = get_domain(args.domain)
    instances = _load(args)
    written = harness.emit_training_vat(domain, instances, Path(args.out), args.budget)
    for path in written:
        print(path)
    return 0


def cmd_gen_knapsack(args: argparse.Namespace) -> int:
    kinds = _scenario_list(args.classes)
    instances = generate_instances(args.count, args.items, kinds, args.seed, args.range)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for inst in instances:
        (out / f"{inst.name}.txt").write_text(format_knapsack(inst))
    print(f"{len(instances)} instances written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperselect", description="Selection hyper-heuristics with feature transformations.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, instances_required: bool = True) -> None:
        p.add_argument("--domain", choices=DOMAINS, required=instances_required)
        p.add_argument("--instances", nargs="+", required=instances_required, help="instance files or directories")
        p.add_argument("--budget", type=float, default=None, help="cost limit per instance")

    p = sub.add_parser("train", help="train one selector on the given instances")
    common(p)
    p.add_argument("--scenario", default="O", choices=harness.SCENARIOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cycles", type=int, default=100)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--min-rules", type=int, default=2)
    p.add_argument("--max-rules", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained selector")
    common(p)
    p.add_argument("--selector", required=True)
    p.add_argument("--scenario-file", required=True, help="scenario.json written by train")
    p.add_argument("--out", help="per-instance CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run the scenario x repetition experiment")
    common(p, instances_required=False)
    p.add_argument("--config", help="JSON or YAML configuration file")
    p.add_argument("--scenarios", help="comma separated, e.g. O,K,K+S")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cycles", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--vat", action="store_true")
    p.add_argument("--independent-streams", action="store_true",
                   help="give every scenario its own GA random stream instead of shared ones")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle", help="standalone heuristics and the synthetic oracle")
    common(p)
    p.add_argument("--out", help="per-instance CSV")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("vat", help="VAT images of instance features")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vat)

    p = sub.add_parser("gen-knapsack", help="generate seeded knapsack instances")
    p.add_argument("--count", type=int, default=600)
    p.add_argument("--items", type=int, default=50)
    p.add_argument("--classes", default="uncorrelated,weakly,strongly",
                   help=f"comma separated subset of {','.join(GENERATOR_CLASSES)}")
    p.add_argument("--range", type=int, default=1000, help="coefficient range R")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_knapsack)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (HyperSelectError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
