"""Binary extensional constraint satisfaction.

Search is a depth-first backtracking over variables with backward checking:
when a variable receives a value it is checked against every already
assigned neighbour, one consistency check (cc) per constraint evaluated,
stopping at the first conflict. Values are tried in ascending order. The
variable to instantiate next is picked by one of four ordering heuristics,
and a hyper-heuristic may switch heuristic at every node.
"""

from __future__ import annotations

import json
import math
import re
import xml.etree.ElementTree as ET
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import DomainAdapter, SolveOutcome
from ..errors import InvalidInputError, ParseError

CSP_FEATURES = ("p1", "p2", "c", "UQp1", "LQp1", "UQp2", "LQp2", "kappa")
# -log2 of machine epsilon; stands in for the infinite term of a fully conflicting constraint
KAPPA_TERM_CAP = -math.log2(np.finfo(float).eps)
DEFAULT_BUDGET = 10**7


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, int]
    conflicts: frozenset[tuple[int, int]]


class CspInstance:
    """Variables with finite integer domains and binary conflict constraints.

    Constraint scopes are stored with the smaller variable index first and
    conflict tuples ordered accordingly.
    """

    def __init__(self, domains: Sequence[Sequence[int]], constraints: Sequence[Constraint],
                 names: Sequence[str] | None = None, name: str = ""):
        self.domains = tuple(tuple(int(v) for v in d) for d in domains)
        self.names = tuple(names) if names is not None else tuple(f"V{i}" for i in range(len(self.domains)))
        self.name = name
        n = len(self.domains)
        if len(self.names) != n:
            raise InvalidInputError("one name per variable is required")
        for i, d in enumerate(self.domains):
            if not d:
                raise InvalidInputError(f"variable {self.names[i]} has an empty domain")
            if len(set(d)) != len(d):
                raise InvalidInputError(f"variable {self.names[i]} has repeated domain values")
        normalised = []
        seen = set()
        for c in constraints:
            i, j = c.scope
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"invalid constraint scope {c.scope}")
            tuples = c.conflicts if i < j else frozenset((b, a) for a, b in c.conflicts)
            i, j = min(i, j), max(i, j)
            if (i, j) in seen:
                raise InvalidInputError(f"duplicate constraint on variables {i} and {j}")
            seen.add((i, j))
            di, dj = set(self.domains[i]), set(self.domains[j])
            if any(a not in di or b not in dj for a, b in tuples):
                raise InvalidInputError(f"conflict tuple outside the domains of constraint ({i}, {j})")
            normalised.append(Constraint((i, j), frozenset(tuples)))
        self.constraints = tuple(normalised)

        # lookup tables used during search
        self.neighbours: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.pair_conflicts: dict[tuple[int, int], frozenset[tuple[int, int]]] = {}
        self.pair_index: dict[tuple[int, int], int] = {}
        self.tightness: list[float] = []
        for k, c in enumerate(self.constraints):
            i, j = c.scope
            self.neighbours[i].append((j, k))
            self.neighbours[j].append((i, k))
            self.pair_conflicts[(i, j)] = c.conflicts
            self.pair_conflicts[(j, i)] = frozenset((b, a) for a, b in c.conflicts)
            self.pair_index[(i, j)] = self.pair_index[(j, i)] = k
            self.tightness.append(len(c.conflicts) / (len(self.domains[i]) * len(self.domains[j])))
        self.adjacency = [frozenset(u for u, _ in nb) for nb in self.neighbours]
        self.kappa_terms = [
            KAPPA_TERM_CAP if t >= 1.0 else -math.log2(1.0 - t) for t in self.tightness
        ]
        self.log_domain = [math.log2(len(d)) for d in self.domains]

    @property
    def n_variables(self) -> int:
        return len(self.domains)

    def __repr__(self) -> str:
        return f"CspInstance({self.name!r}, variables={self.n_variables}, constraints={len(self.constraints)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CspInstance):
            return NotImplemented
        return self.domains == other.domains and set(self.constraints) == set(other.constraints)

    def conflict(self, u: int, val_u: int, v: int, val_v: int) -> bool:
        return (val_u, val_v) in self.pair_conflicts[(u, v)]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "variables": [{"name": nm, "domain": list(d)} for nm, d in zip(self.names, self.domains)],
            "constraints": [
                {"scope": list(c.scope), "conflicts": sorted([list(t) for t in c.conflicts])}
                for c in self.constraints
            ],
        }


@dataclass
class CspSearchState:
    instance: CspInstance
    assignment: dict[int, int] = field(default_factory=dict)
    # (variable, index of its current value) in assignment order
    stack: list[list[int]] = field(default_factory=list)
    cc: int = 0
    weights: list[int] = field(default_factory=list)
    done: bool = False
    satisfiable: bool | None = None
    last_features: list[float] | None = None

    @property
    def unassigned(self) -> list[int]:
        return [v for v in range(self.instance.n_variables) if v not in self.assignment]


def initial_state(instance: CspInstance) -> CspSearchState:
    state = CspSearchState(instance, weights=[1] * len(instance.constraints))
    if instance.n_variables == 0:
        state.done, state.satisfiable = True, True
    return state


# -- features ---------------------------------------------------------------

def quantile(values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile (the default of numpy and R type 7)."""
    if not values:
        return 0.0
    s = sorted(values)
    h = (len(s) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (h - lo) * (s[hi] - s[lo])


def clustering_coefficient(adjacency: Sequence[frozenset[int]], nodes: Sequence[int]) -> float:
    """Mean local clustering coefficient of the graph induced by ``nodes``."""
    if not nodes:
        return 0.0
    members = set(nodes)
    total = 0.0
    for v in nodes:
        nbrs = adjacency[v] & members
        k = len(nbrs)
        if k < 2:
            continue
        links = sum(len(adjacency[a] & nbrs) for a in nbrs) / 2
        total += 2.0 * links / (k * (k - 1))
    return total / len(nodes)


def kappa(instance: CspInstance, variables: Sequence[int]) -> float:
    """Constrainedness of the subproblem induced by ``variables``."""
    members = set(variables)
    num = sum(
        instance.kappa_terms[k]
        for k, c in enumerate(instance.constraints)
        if c.scope[0] in members and c.scope[1] in members
    )
    den = sum(instance.log_domain[v] for v in members)
    return num / den if den > 0 else num


def subproblem_features(instance: CspInstance, variables: Sequence[int]) -> list[float]:
    members = set(variables)
    n = len(members)
    inner = [k for k, c in enumerate(instance.constraints) if c.scope[0] in members and c.scope[1] in members]
    tight = [instance.tightness[k] for k in inner]
    pairs = n * (n - 1) / 2
    p1 = len(inner) / pairs if pairs else 0.0
    p2 = sum(tight) / len(tight) if tight else 0.0
    ordered = sorted(members)
    c = clustering_coefficient(instance.adjacency, ordered)
    density = [len(instance.adjacency[v] & members) / (n - 1) for v in ordered] if n > 1 else [0.0] * n
    num = sum(instance.kappa_terms[k] for k in inner)
    den = sum(instance.log_domain[v] for v in ordered)
    kap = num / den if den > 0 else num
    return [
        p1, p2, c,
        quantile(density, 0.75), quantile(density, 0.25),
        quantile(tight, 0.75), quantile(tight, 0.25),
        kap,
    ]


def compute_features(state: CspSearchState | CspInstance) -> list[float]:
    """The eight features over the unassigned part of the problem.

    With fewer than two unassigned variables the last computed vector is
    returned unchanged.
    """
    if isinstance(state, CspInstance):
        return subproblem_features(state, range(state.n_variables))
    free = state.unassigned
    if len(free) < 2 and state.last_features is not None:
        return state.last_features
    state.last_features = subproblem_features(state.instance, free)
    return state.last_features


# -- variable ordering heuristics -------------------------------------------
# Each takes (instance, assignment, weights) and returns an unassigned
# variable; ties go to the lowest index.

def _free(instance: CspInstance, assignment: dict[int, int]) -> list[int]:
    free = [v for v in range(instance.n_variables) if v not in assignment]
    if not free:
        raise InvalidInputError("no unassigned variable left")
    return free


def available_values(instance: CspInstance, assignment: dict[int, int], v: int) -> int:
    """Values of ``v`` compatible with the current assignment (not charged as checks)."""
    past = [(u, assignment[u]) for u, _ in instance.neighbours[v] if u in assignment]
    if not past:
        return len(instance.domains[v])
    return sum(
        1 for val in instance.domains[v]
        if not any((val_u, val) in instance.pair_conflicts[(u, v)] for u, val_u in past)
    )


def heuristic_dom(instance: CspInstance, assignment: dict[int, int], weights: Sequence[int]) -> int:
    return min(_free(instance, assignment), key=lambda v: (available_values(instance, assignment, v), v))


def future_degree(instance: CspInstance, assignment: dict[int, int], v: int) -> int:
    return sum(1 for u, _ in instance.neighbours[v] if u not in assignment)


def heuristic_deg(instance: CspInstance, assignment: dict[int, int], weights: Sequence[int]) -> int:
    return min(_free(instance, assignment), key=lambda v: (-future_degree(instance, assignment, v), v))


def weighted_degree(instance: CspInstance, assignment: dict[int, int], weights: Sequence[int], v: int) -> int:
    return sum(weights[k] for u, k in instance.neighbours[v] if u not in assignment)


def heuristic_wdeg(instance: CspInstance, assignment: dict[int, int], weights: Sequence[int]) -> int:
    return min(_free(instance, assignment), key=lambda v: (-weighted_degree(instance, assignment, weights, v), v))


def heuristic_kappa(instance: CspInstance, assignment: dict[int, int], weights: Sequence[int]) -> int:
    """Variable whose removal leaves the least constrained residual subproblem."""
    free = _free(instance, assignment)
    members = set(free)
    num = sum(
        instance.kappa_terms[k]
        for k, c in enumerate(instance.constraints)
        if c.scope[0] in members and c.scope[1] in members
    )
    den = sum(instance.log_domain[v] for v in free)

    def residual(v: int) -> float:
        n = num - sum(instance.kappa_terms[k] for u, k in instance.neighbours[v] if u in members)
        d = den - instance.log_domain[v]
        if d <= 1e-12:
            return n if n > 1e-12 else 0.0
        return n / d

    return min(free, key=lambda v: (residual(v), v))


HEURISTICS: tuple[Callable[[CspInstance, dict[int, int], Sequence[int]], int], ...] = (
    heuristic_dom, heuristic_deg, heuristic_kappa, heuristic_wdeg,
)
HEURISTIC_NAMES = ("DOM", "DEG", "KAPPA", "WDEG")


# -- search -----------------------------------------------------------------

def _consistent(state: CspSearchState, v: int, val: int) -> bool:
    inst = state.instance
    for u, _ in state.stack:
        if u == v:
            continue
        pair = (u, v)
        conflicts = inst.pair_conflicts.get(pair)
        if conflicts is None:
            continue
        state.cc += 1
        if (state.assignment[u], val) in conflicts:
            state.weights[inst.pair_index[pair]] += 1
            return False
    return True


def _advance(state: CspSearchState) -> None:
    """Give the top-of-stack variable its next consistent value, backtracking as needed."""
    inst = state.instance
    while state.stack:
        frame = state.stack[-1]
        v, idx = frame
        state.assignment.pop(v, None)
        domain = inst.domains[v]
        for k in range(idx + 1, len(domain)):
            if _consistent(state, v, domain[k]):
                frame[1] = k
                state.assignment[v] = domain[k]
                if len(state.assignment) == inst.n_variables:
                    state.done, state.satisfiable = True, True
                return
        state.stack.pop()
    state.done, state.satisfiable = True, False


def backtracking_step(state: CspSearchState, choose: Callable[[CspSearchState], int]) -> CspSearchState:
    """Instantiate one more variable (picked by ``choose``), backtracking on dead ends."""
    if state.done:
        raise InvalidInputError("search already finished")
    v = choose(state)
    if v in state.assignment:
        raise InvalidInputError(f"variable {v} is already assigned")
    state.stack.append([v, -1])
    _advance(state)
    return state


def csp_metrics(outcomes: Sequence[SolveOutcome]) -> dict[str, float]:
    if not outcomes:
        raise InvalidInputError("metrics need at least one outcome")
    cc = sum(o.cost for o in outcomes)
    acc = sum(o.cost for o in outcomes if not o.timed_out)
    sr = sum(1 for o in outcomes if o.solved) / len(outcomes)
    return {"SR": sr, "ACC": float(acc), "CC": float(cc)}


class CspDomain(DomainAdapter):
    """CSP adapter; ``features`` may restrict the vector to a subset, e.g. ``("p1", "p2")``."""

    name = "csp"
    heuristic_names = HEURISTIC_NAMES
    maximize = False
    default_budget = DEFAULT_BUDGET
    report_metrics = (("SR", True), ("ACC", False), ("CC", False))

    def __init__(self, features: Sequence[str] = CSP_FEATURES):
        unknown = [f for f in features if f not in CSP_FEATURES]
        if unknown or not features:
            raise InvalidInputError(f"unknown CSP features {unknown}")
        self.feature_names = tuple(features)
        self._pick = [CSP_FEATURES.index(f) for f in features]

    def initial_state(self, instance: CspInstance) -> CspSearchState:
        return initial_state(instance)

    def features(self, state: CspSearchState) -> list[float]:
        full = compute_features(state)
        return [full[i] for i in self._pick]

    def apply(self, state: CspSearchState, action: int) -> CspSearchState:
        heuristic = HEURISTICS[action]
        return backtracking_step(state, lambda s: heuristic(s.instance, s.assignment, s.weights))

    def finished(self, state: CspSearchState) -> bool:
        return state.done

    def cost(self, state: CspSearchState, steps: int) -> float:
        return state.cc

    def objective(self, state: CspSearchState) -> float:
        return state.cc

    def fitness_value(self, outcome: SolveOutcome, budget: float) -> float:
        # a run that did not complete is charged the whole budget
        return budget if not outcome.solved else outcome.cost

    def metrics(self, outcomes: Sequence[SolveOutcome]) -> dict[str, float]:
        return csp_metrics(outcomes)


# -- instance ingestion -------------------------------------------------------

def _merge(domains: Sequence[Sequence[int]], raw: Sequence[tuple[int, int, set[tuple[int, int]]]]) -> list[Constraint]:
    """Fold repeated constraints on one pair into a single one (union of conflicts)."""
    merged: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for i, j, conflicts in raw:
        if i > j:
            i, j = j, i
            conflicts = {(b, a) for a, b in conflicts}
        merged.setdefault((i, j), set()).update(conflicts)
    return [Constraint(scope, frozenset(t)) for scope, t in merged.items()]


def parse_csp_json(text: str, name: str = "") -> CspInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        variables = data["variables"]
        domains = [list(v["domain"]) for v in variables]
        names = [str(v.get("name", f"V{i}")) for i, v in enumerate(variables)]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed 'variables' element: {exc}") from exc
    raw = []
    for k, c in enumerate(data.get("constraints", [])):
        where = f"constraints[{k}]"
        scope = c.get("scope")
        if not isinstance(scope, list) or len(scope) != 2:
            raise ParseError(f"{where}: only binary scopes are supported")
        i, j = int(scope[0]), int(scope[1])
        if i == j or not (0 <= i < len(domains) and 0 <= j < len(domains)):
            raise ParseError(f"{where}: invalid scope {scope}")
        if "conflicts" in c:
            tuples = {(int(a), int(b)) for a, b in c["conflicts"]}
        elif "supports" in c:
            sup = {(int(a), int(b)) for a, b in c["supports"]}
            tuples = {(a, b) for a in domains[i] for b in domains[j] if (a, b) not in sup}
        else:
            raise ParseError(f"{where}: needs 'conflicts' or 'supports'")
        di, dj = set(domains[i]), set(domains[j])
        if any(a not in di or b not in dj for a, b in tuples):
            raise ParseError(f"{where}: conflict tuple outside the variable domains")
        raw.append((i, j, tuples))
    try:
        return CspInstance(domains, _merge(domains, raw), names, name or data.get("name", ""))
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc


def _parse_values(text: str, where: str) -> list[int]:
    values = []
    for token in (text or "").split():
        try:
            if ".." in token:
                lo, hi = token.split("..")
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(token))
        except ValueError:
            raise ParseError(f"{where}: bad domain token {token!r}") from None
    return values


def _xcsp2(root: ET.Element, name: str) -> CspInstance:
    domains_by_name = {}
    for d in root.iter("domain"):
        domains_by_name[d.get("name")] = _parse_values(d.text, f"domain {d.get('name')}")
    var_index, names, domains = {}, [], []
    for v in root.iter("variable"):
        dname = v.get("domain")
        if dname not in domains_by_name:
            raise ParseError(f"variable {v.get('name')}: unknown domain {dname!r}")
        var_index[v.get("name")] = len(names)
        names.append(v.get("name"))
        domains.append(domains_by_name[dname])
    relations = {}
    for r in root.iter("relation"):
        rname = r.get("name")
        if r.get("arity") != "2":
            relations[rname] = None
            continue
        semantics = r.get("semantics")
        if semantics not in ("conflicts", "supports"):
            raise ParseError(f"relation {rname}: unknown semantics {semantics!r}")
        tuples = set()
        for chunk in (r.text or "").split("|"):
            parts = chunk.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(f"relation {rname}: non-binary tuple {chunk.strip()!r}")
            tuples.add((int(parts[0]), int(parts[1])))
        relations[rname] = (semantics, tuples)
    predicates = {p.get("name") for p in root.iter("predicate")}
    raw = []
    for c in root.iter("constraint"):
        cname = c.get("name")
        scope = (c.get("scope") or "").split()
        if len(scope) != 2:
            raise ParseError(f"constraint {cname}: only binary constraints are supported")
        ref = c.get("reference")
        if ref in predicates or (ref or "").startswith("global:"):
            raise ParseError(f"constraint {cname}: intensional/global constraints are not supported")
        if ref not in relations:
            raise ParseError(f"constraint {cname}: unknown relation {ref!r}")
        if relations[ref] is None:
            raise ParseError(f"constraint {cname}: relation {ref} is not binary")
        try:
            i, j = var_index[scope[0]], var_index[scope[1]]
        except KeyError as exc:
            raise ParseError(f"constraint {cname}: unknown variable {exc}") from None
        raw.append((i, j, _to_conflicts(relations[ref], domains[i], domains[j])))
    return _build(domains, raw, names, name)


def _to_conflicts(relation: tuple[str, set[tuple[int, int]]], di: Sequence[int], dj: Sequence[int]) -> set[tuple[int, int]]:
    semantics, tuples = relation
    si, sj = set(di), set(dj)
    if semantics == "conflicts":
        # relations are shared between scopes, keep the tuples inside this pair's domains
        return {(a, b) for a, b in tuples if a in si and b in sj}
    return {(a, b) for a in di for b in dj if (a, b) not in tuples}


def _build(domains, raw, names, name) -> CspInstance:
    try:
        return CspInstance(domains, _merge(domains, raw), names, name)
    except InvalidInputError as exc:
        raise ParseError(str(exc)) from exc


_TUPLE = re.compile(r"\(([^)]*)\)")


def _xcsp3(root: ET.Element, name: str) -> CspInstance:
    var_index, names, domains = {}, [], []
    variables = root.find("variables")
    for v in (variables if variables is not None else []):
        if v.tag != "var":
            raise ParseError(f"element <{v.tag}> in <variables> is not supported")
        vid = v.get("id")
        var_index[vid] = len(names)
        names.append(vid)
        domains.append(_parse_values(v.text, f"var {vid}"))
    raw = []
    constraints = root.find("constraints")
    for k, c in enumerate(constraints if constraints is not None else []):
        where = f"constraint #{k} <{c.tag}>"
        if c.tag != "extension":
            raise ParseError(f"{where}: only <extension> constraints are supported")
        scope = (c.findtext("list") or "").split()
        if len(scope) != 2:
            raise ParseError(f"{where}: only binary constraints are supported")
        try:
            i, j = var_index[scope[0]], var_index[scope[1]]
        except KeyError as exc:
            raise ParseError(f"{where}: unknown variable {exc}") from None
        sup, con = c.find("supports"), c.find("conflicts")
        node, semantics = (sup, "supports") if sup is not None else (con, "conflicts")
        if node is None:
            raise ParseError(f"{where}: needs <supports> or <conflicts>")
        tuples = set()
        for body in _TUPLE.findall(node.text or ""):
            parts = body.split(",")
            if len(parts) != 2:
                raise ParseError(f"{where}: non-binary tuple ({body})")
            tuples.add((int(parts[0]), int(parts[1])))
        raw.append((i, j, _to_conflicts((semantics, tuples), domains[i], domains[j])))
    return _build(domains, raw, names, name)


def parse_xcsp(text: str, name: str = "") -> CspInstance:
    """Binary extensional subset of XCSP 2.1 and XCSP3."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    if root.tag != "instance":
        raise ParseError(f"expected <instance> root, found <{root.tag}>")
    pres = root.find("presentation")
    if pres is not None and not name:
        name = pres.get("name", "")
    if root.find("variables") is not None and root.find("variables").find("var") is not None:
        return _xcsp3(root, name)
    if root.get("format", "").upper().startswith("XCSP3"):
        return _xcsp3(root, name)
    return _xcsp2(root, name)


def parse_csp(text: str, name: str = "") -> CspInstance:
    if text.lstrip().startswith("<"):
        return parse_xcsp(text, name)
    return parse_csp_json(text, name)


def load_csp_instances(path: str | Path) -> list[CspInstance]:
    """Load one instance file, or every ``.json``/``.xml`` file in a directory."""
    path = Path(path)
    if path.is_dir():
        return [
            inst for child in sorted(path.iterdir())
            if child.suffix in (".json", ".xml")
            for inst in load_csp_instances(child)
        ]
    try:
        return [parse_csp(path.read_text(), name=path.stem)]
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def random_csp(n: int, d: int, density: float, tightness: float, rng: np.random.Generator, name: str = "") -> CspInstance:
    """Random binary CSP with a fixed number of constraints and conflicts per constraint."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    n_constraints = round(density * len(pairs))
    n_conflicts = round(tightness * d * d)
    chosen = rng.choice(len(pairs), size=n_constraints, replace=False) if n_constraints else []
    all_tuples = [(a, b) for a in range(d) for b in range(d)]
    constraints = []
    for k in sorted(int(x) for x in chosen):
        picks = rng.choice(len(all_tuples), size=n_conflicts, replace=False) if n_conflicts else []
        constraints.append(Constraint(pairs[k], frozenset(all_tuples[int(t)] for t in picks)))
    return CspInstance([list(range(d))] * n, constraints, name=name)
