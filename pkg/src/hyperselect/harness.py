"""Experiment orchestration: splits, scenarios, baselines, reports and VAT images.

A scenario fixes how features reach the selector (an explicit transform)
and how rules are compared with them (Euclidean or kernel distance):

    O     identity transform, Euclidean distance
    L/S   fitted linear / S-shaped transform, Euclidean distance
    E     exponential transform (K=5), Euclidean distance
    K     identity transform, rbf kernel distance with gamma = 1/features
    K+L   fitted linear transform, rbf kernel distance
    K+S   fitted S-shaped transform, rbf kernel distance

By default every repetition derives its own seed from the master seed and
the repetition number only, so all scenarios see the same GA random streams
(common random numbers) and scenario comparisons are paired. With
``paired_seeds=False`` the scenario id is mixed into the seed as well and
each scenario gets an independent stream.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .core import DomainAdapter, OracleResult, Selector, SolveOutcome, run_heuristic, solve_instance, synthetic_oracle
from .domains import get_domain, load_instances
from .errors import ConfigError, InvalidInputError
from .ga import GAConfig, TrainingResult, train
from .kernels import EuclideanMetric, KernelMetric, KernelSpec, default_gamma, pairwise_matrix
from .stats import summarize, wilcoxon_one_tailed
from .transforms import TransformSpec

log = logging.getLogger(__name__)

SCENARIOS = ("O", "L", "E", "S", "K", "K+L", "K+S")
_SPLIT_KEY = 0
_RUN_KEY = 1


def derive_seed(master: int, *keys: int) -> int:
    """64-bit seed for the stream identified by ``keys`` under ``master``."""
    return int(np.random.SeedSequence([master, *keys]).generate_state(1, dtype=np.uint64)[0])


def train_count(n: int, fraction: float) -> int:
    # round half up: 5% of 322 -> 16, of 600 -> 30
    return math.floor(fraction * n + 0.5 + 1e-9)


def split_instances(instances: Sequence[Any], fraction: float, seed: int,
                    count: int | None = None) -> tuple[list[Any], list[Any]]:
    """Seeded train/test split; the test part keeps the original order."""
    if count is None:
        if not 0 < fraction < 1:
            raise ConfigError("train fraction must lie in (0, 1)")
        count = train_count(len(instances), fraction)
    if count < 1 or count >= len(instances):
        raise ConfigError(f"cannot draw {count} training instances out of {len(instances)}")
    rng = np.random.default_rng(derive_seed(seed, _SPLIT_KEY))
    picked = set(int(i) for i in rng.choice(len(instances), size=count, replace=False))
    train_set = [inst for i, inst in enumerate(instances) if i in picked]
    test_set = [inst for i, inst in enumerate(instances) if i not in picked]
    return train_set, test_set


@dataclass(frozen=True)
class Scenario:
    id: str
    transform: TransformSpec
    kernel: KernelSpec | None = None

    @property
    def metric(self) -> EuclideanMetric | KernelMetric:
        return EuclideanMetric() if self.kernel is None else KernelMetric(self.kernel)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "transform": self.transform.to_dict(),
            "metric": {"kind": "euclidean"} if self.kernel is None else {"kind": "kernel", **self.kernel.to_dict()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        metric = data.get("metric", {"kind": "euclidean"})
        kernel = None if metric.get("kind") == "euclidean" else KernelSpec.from_dict(metric)
        return cls(data["id"], TransformSpec.from_dict(data["transform"]), kernel)


def build_scenario(scenario_id: str, training_features: Sequence[Sequence[float]]) -> Scenario:
    """Fit the transform and choose the metric of one scenario.

    ``training_features`` holds feature snapshots collected on the training
    instances (rows) and fixes the feature count.
    """
    if scenario_id not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario_id!r}; choose from {', '.join(SCENARIOS)}")
    matrix = np.asarray(training_features, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise InvalidInputError("training features must be a non-empty matrix")
    base, _, explicit = scenario_id.partition("+")
    kernel = KernelSpec("rbf", gamma=default_gamma(matrix.shape[1])) if base == "K" else None
    kind = {"O": "identity", "K": "identity", "L": "linear", "S": "s_shaped", "E": "exponential"}[explicit or base]
    return Scenario(scenario_id, TransformSpec.fit(kind, matrix), kernel)


def feature_snapshots(domain: DomainAdapter, instances: Sequence[Any], budget: float | None = None) -> list[list[float]]:
    """Feature vectors met while each standalone heuristic solves each instance."""
    budget = domain.default_budget if budget is None else budget
    rows = []
    for instance in instances:
        for h in range(domain.heuristic_count):
            state = domain.initial_state(instance)
            steps = 0
            while not domain.finished(state) and domain.cost(state, steps) <= budget:
                rows.append(list(domain.features(state)))
                state = domain.apply(state, h)
                steps += 1
    return rows


@dataclass
class Baselines:
    per_heuristic: list[list[SolveOutcome]]
    oracle: OracleResult
    metrics: dict[str, dict[str, float]]


def compute_baselines(domain: DomainAdapter, instances: Sequence[Any], budget: float | None = None) -> Baselines:
    per = [[run_heuristic(h, inst, domain, budget) for inst in instances] for h in range(domain.heuristic_count)]
    oracle = synthetic_oracle(per, domain)
    metrics = {name: domain.metrics(rows) for name, rows in zip(domain.heuristic_names, per)}
    metrics["ORACLE"] = oracle.metrics
    return Baselines(per, oracle, metrics)


def evaluate_selector(selector: Selector, scenario: Scenario, domain: DomainAdapter, instances: Sequence[Any],
                      budget: float | None = None) -> list[SolveOutcome]:
    return [solve_instance(selector, inst, domain, scenario.transform, scenario.metric, budget) for inst in instances]


@dataclass
class ExperimentConfig:
    domain: str
    instances: list[str] = field(default_factory=list)
    train_fraction: float = 0.05
    train_count: int | None = None
    scenarios: tuple[str, ...] = SCENARIOS
    repetitions: int = 15
    ga: GAConfig = field(default_factory=GAConfig)
    budget: float | None = None
    seed: int = 0
    output: str | None = None
    vat: bool = False
    workers: int = 1
    paired_seeds: bool = True

    def __post_init__(self) -> None:
        self.scenarios = tuple(self.scenarios)
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        unknown = [s for s in self.scenarios if s not in SCENARIOS]
        if unknown:
            raise ConfigError(f"unknown scenarios {unknown}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.train_count is None and not 0 < self.train_fraction < 1:
            raise ConfigError("train fraction must lie in (0, 1)")
        if isinstance(self.ga, dict):
            self.ga = GAConfig(**self.ga)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        data = dict(data)
        if isinstance(data.get("instances"), str):
            data["instances"] = [data["instances"]]
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        """Read a JSON or YAML document of configuration keys."""
        path = Path(path)
        text = path.read_text()
        if path.suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping of configuration keys")
        return cls.from_dict(data)


@dataclass
class RunResult:
    scenario: str
    repetition: int
    seed: int
    metrics: dict[str, float]
    train_fitness: float
    selector: Selector
    training: TrainingResult | None = None


@dataclass
class ScenarioResult:
    scenario: Scenario
    runs: list[RunResult]
    summaries: dict[str, Any] = field(default_factory=dict)
    pvalues: dict[str, Any] = field(default_factory=dict)

    def metric_values(self, name: str) -> list[float]:
        return [r.metrics[name] for r in self.runs]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    scenarios: dict[str, ScenarioResult]
    baselines: Baselines
    n_train: int
    n_test: int


def _run_cell(domain: DomainAdapter, scenario: Scenario, ga: GAConfig, repetition: int,
              train_set: Sequence[Any], test_set: Sequence[Any], budget: float | None) -> RunResult:
    result = train(ga, domain, train_set, scenario.transform, scenario.metric)
    outcomes = evaluate_selector(result.best, scenario, domain, test_set, budget)
    return RunResult(scenario.id, repetition, ga.seed, domain.metrics(outcomes), result.fitness.total,
                     result.best, result)


def _run_cell_args(args: tuple) -> RunResult:
    return _run_cell(*args)


def run_experiment(config: ExperimentConfig, instances: Sequence[Any] | None = None,
                   progress: Callable[[str], None] | None = None) -> ExperimentResult:
    domain = get_domain(config.domain)
    if instances is None:
        if not config.instances:
            raise ConfigError("no instances given")
        instances = [inst for p in config.instances for inst in load_instances(config.domain, p)]
    train_set, test_set = split_instances(instances, config.train_fraction, config.seed, config.train_count)
    budget = config.budget
    snapshots = feature_snapshots(domain, train_set, budget)
    baselines = compute_baselines(domain, test_set, budget)

    scenarios = {sid: build_scenario(sid, snapshots) for sid in config.scenarios}
    jobs = []
    for sid in config.scenarios:
        for rep in range(config.repetitions):
            keys = (_RUN_KEY, rep) if config.paired_seeds else (_RUN_KEY, rep, SCENARIOS.index(sid) + 1)
            ga = replace(config.ga, seed=derive_seed(config.seed, *keys), budget=budget)
            jobs.append((domain, scenarios[sid], ga, rep, train_set, test_set, budget))
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(_run_cell_args, jobs))
    else:
        runs = []
        for job in jobs:
            runs.append(_run_cell_args(job))
            if progress:
                progress(f"{job[1].id} repetition {job[3]} done")

    results = {sid: ScenarioResult(scenarios[sid], [r for r in runs if r.scenario == sid]) for sid in config.scenarios}
    for res in results.values():
        for name, _ in domain.report_metrics:
            res.summaries[name] = summarize(res.metric_values(name))
    if "O" in results and config.repetitions >= 3:
        base = results["O"]
        for sid, res in results.items():
            if sid == "O":
                continue
            for name, higher in domain.report_metrics:
                res.pvalues[name] = wilcoxon_one_tailed(
                    res.metric_values(name), base.metric_values(name), "greater" if higher else "less"
                )
    experiment = ExperimentResult(config, results, baselines, len(train_set), len(test_set))
    if config.output:
        write_reports(experiment, domain, Path(config.output))
        if config.vat and len(train_set) >= 2:
            emit_training_vat(domain, train_set, Path(config.output) / "vat", budget)
        elif config.vat:
            log.warning("VAT skipped: it needs at least two training instances")
    return experiment


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def write_reports(result: ExperimentResult, domain: DomainAdapter, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "selectors").mkdir(exist_ok=True)
    (out / "logs").mkdir(exist_ok=True)
    (out / "scenarios").mkdir(exist_ok=True)
    metric_names = [name for name, _ in domain.report_metrics]

    run_rows = []
    for sid, res in result.scenarios.items():
        (out / "scenarios" / f"{sid}.json").write_text(json.dumps(res.scenario.to_dict(), indent=2) + "\n")
        for run in res.runs:
            stem = f"{sid}_{run.repetition:02d}"
            (out / "selectors" / f"{stem}.json").write_text(run.selector.to_json() + "\n")
            if run.training is not None:
                run.training.write_log(out / "logs" / f"{stem}.csv")
            run_rows.append([sid, run.repetition, run.seed, *(run.metrics[m] for m in metric_names),
                             run.train_fitness, len(run.selector)])
    _write_csv(out / "runs.csv", ["scenario", "repetition", "seed", *metric_names, "train_fitness", "rule_count"],
               run_rows)

    _write_csv(out / "baselines.csv", ["solver", *metric_names],
               [[name, *(m[k] for k in metric_names)] for name, m in result.baselines.metrics.items()])

    summary_rows, p_rows = [], []
    for sid, res in result.scenarios.items():
        for name in metric_names:
            s = res.summaries[name]
            summary_rows.append([sid, name, s.n, s.mean, s.median, s.sd, s.lq, s.uq,
                                 len(s.mild_outliers), len(s.extreme_outliers)])
        for name, test in res.pvalues.items():
            higher = dict(domain.report_metrics)[name]
            p_rows.append([sid, name, "greater" if higher else "less", test.statistic, test.p_value,
                           int(test.degenerate)])
    _write_csv(out / "summary.csv", ["scenario", "metric", "n", "mean", "median", "sd", "lq", "uq",
                                     "mild_outliers", "extreme_outliers"], summary_rows)
    _write_csv(out / "pvalues.csv", ["scenario", "metric", "alternative", "statistic", "p_value", "degenerate"],
               p_rows)
    (out / "summary.md").write_text(markdown_summary(result, domain))


def markdown_summary(result: ExperimentResult, domain: DomainAdapter) -> str:
    names = [name for name, _ in domain.report_metrics]
    lines = [
        f"# Experiment on `{result.config.domain}`",
        "",
        f"{result.n_train} training instances, {result.n_test} test instances, "
        f"{result.config.repetitions} repetitions per scenario, master seed {result.config.seed}.",
        "",
        "## Baselines on the test split",
        "",
        "| solver | " + " | ".join(names) + " |",
        "|---" * (len(names) + 1) + "|",
    ]
    for solver, m in result.baselines.metrics.items():
        lines.append(f"| {solver} | " + " | ".join(f"{m[k]:.6g}" for k in names) + " |")
    lines += ["", "## Scenarios (mean / sd / p-value vs O)", "",
              "| scenario | " + " | ".join(names) + " |", "|---" * (len(names) + 1) + "|"]
    for sid, res in result.scenarios.items():
        cells = []
        for k in names:
            s = res.summaries[k]
            p = res.pvalues.get(k)
            cells.append(f"{s.mean:.6g} / {s.sd:.4g}" + (f" / p={p.p_value:.4f}" if p else ""))
        lines.append(f"| {sid} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


# -- VAT images ---------------------------------------------------------------

def write_pgm(path: str | Path, gray: np.ndarray) -> None:
    gray = np.asarray(gray, dtype=np.uint8)
    rows, cols = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(gray.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise InvalidInputError(f"{path}: not a binary PGM")
    cols, rows = int(parts[1]), int(parts[2])
    return np.frombuffer(data[-rows * cols:], dtype=np.uint8).reshape(rows, cols)


def vat_image(points: Sequence[Sequence[float]], groups: Sequence[Any], metric: Callable) -> tuple[np.ndarray, np.ndarray]:
    """Group-sorted distance matrix and its grey levels (black = identical)."""
    if len(points) < 2:
        raise InvalidInputError("a VAT image needs at least two points")
    if len(groups) != len(points):
        raise InvalidInputError("one group label per point is required")
    order = sorted(range(len(points)), key=lambda i: (groups[i], i))
    matrix = pairwise_matrix([points[i] for i in order], metric)
    top = matrix.max()
    scaled = matrix / top if top > 0 else np.zeros_like(matrix)
    return matrix, np.rint(255 * scaled).astype(np.uint8)


def emit_vat(points: Sequence[Sequence[float]], groups: Sequence[Any], metric: Callable,
             path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.pgm`` and ``<path>.csv``; returns both paths."""
    path = Path(path)
    matrix, gray = vat_image(points, groups, metric)
    pgm, csv_path = path.with_suffix(".pgm"), path.with_suffix(".csv")
    try:
        write_pgm(pgm, gray)
        np.savetxt(csv_path, matrix, delimiter=",", fmt="%.17g")
    except OSError as exc:
        raise OSError(f"cannot write VAT output to {path}: {exc}") from exc
    return pgm, csv_path


def emit_training_vat(domain: DomainAdapter, instances: Sequence[Any], out: Path,
                      budget: float | None = None) -> list[Path]:
    """VAT images of the initial features, grouped by the best standalone heuristic."""
    out.mkdir(parents=True, exist_ok=True)
    points = [list(domain.features(domain.initial_state(inst))) for inst in instances]
    per = [[run_heuristic(h, inst, domain, budget) for inst in instances] for h in range(domain.heuristic_count)]
    groups = list(synthetic_oracle(per, domain).choices)
    rbf = KernelMetric(KernelSpec("rbf", gamma=default_gamma(domain.feature_count)))
    written = []
    written += emit_vat(points, groups, EuclideanMetric(), out / "euclidean")
    written += emit_vat(points, groups, rbf, out / "rbf")
    return written
