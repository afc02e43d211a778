"""Maximum robust flow (primal path LP) and randomized interdiction (its dual)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from ..errors import ResourceLimitError, ValidationError
from ..instances import (EXACTLY_K, CompatGraph, Digraph, MrfInstance, PathFlow,
                         interdictable_arcs, worst_case_loss)
from ..lp import LinearProgram, OPTIMAL, SimplexEngine, solve_lp
from .limits import Limits, resolve
from .quotient import BundleGraph, PatternSearch

CUTS_PER_ROUND = 8


@dataclass(frozen=True)
class MrfSolution:
    value: Fraction
    flow: PathFlow
    worst_loss: Fraction
    worst_scenario: frozenset
    lp_rows: int = 0


@dataclass(frozen=True)
class RniSolution:
    value: Fraction
    y: dict
    z: dict


@dataclass(frozen=True)
class Decision:
    answer: bool
    witness: object = None
    value: Fraction | None = None
    info: dict = field(default_factory=dict)

    def __bool__(self):
        return self.answer

    @property
    def label(self) -> str:
        return "YES" if self.answer else "NO"


def _check_budget(graph: Digraph, k: int) -> None:
    n = len(interdictable_arcs(graph))
    if k > n:
        raise ValidationError(f"budget {k} exceeds the {n} interdictable arcs")


def _count_patterns(sizes, interdictable, k):
    """Every count vector with exactly ``k`` failures over interdictable bundles."""
    items = [i for i, ok in enumerate(interdictable) if ok]
    out = []

    def rec(pos, rem, acc):
        if rem == 0:
            out.append(tuple(acc))
            return
        for p in range(pos, len(items)):
            i = items[p]
            for j in range(min(sizes[i], rem), 0, -1):
                acc.append((i, j))
                rec(p + 1, rem - j, acc)
                acc.pop()

    rec(0, k, [])
    return out


def solve_mrf(instance: MrfInstance, limits: Limits | None = None, symmetry: bool = True,
              dump=None) -> MrfSolution:
    """Exact optimum of the robust path LP with ``|S| = k`` failure sets.

    Failure constraints are generated lazily; with ``symmetry`` parallel
    interchangeable arcs are solved as one bundle and the optimal flow is
    spread evenly over them.
    """
    lim = resolve(limits)
    graph = instance.graph
    k = instance.k
    _check_budget(graph, k)
    bg = BundleGraph(graph, merge=symmetry)
    bpaths = bg.paths(instance.source, instance.sink, lim.paths)
    if not bpaths:
        loss0, scen = worst_case_loss(PathFlow(), graph, k, EXACTLY_K)
        return MrfSolution(Fraction(0), PathFlow(), loss0, scen)

    lp = LinearProgram("max")
    for p in range(len(bpaths)):
        lp.add_variable(("x", p))
    lp.add_variable("lambda", 0, None)
    uses: dict = {}
    for p, bp in enumerate(bpaths):
        for i in bp:
            uses.setdefault(i, []).append(p)
    for i in sorted(uses):
        b = bg.bundles[i]
        lp.add_constraint({("x", p): 1 for p in uses[i]}, "<=", b.capacity * b.size, ("cap", b.id))
    obj = {("x", p): 1 for p in range(len(bpaths))}
    obj["lambda"] = -1
    lp.set_objective(obj)

    engine = SimplexEngine(lp)
    sol = engine.solve()
    search = PatternSearch(bg.sizes(), bg.interdictable(), k, node_limit=lim.scenarios)
    rows = 0
    added = set()
    while True:
        x = sol.primal
        lam = x["lambda"]
        flows = [(bpaths[p], x[("x", p)]) for p in range(len(bpaths)) if x[("x", p)]]
        cuts = [c for c in search.top(flows, lam, CUTS_PER_ROUND) if c[1] not in added]
        if not cuts:
            break
        for _loss, pat in cuts:
            added.add(pat)
            rows += 1
            if rows > lim.scenarios:
                raise ResourceLimitError("scenario constraints", lim.scenarios)
            coeffs = {}
            for p, bp in enumerate(bpaths):
                c = bg.lost_fraction(bp, pat)
                if c:
                    coeffs[("x", p)] = c
            coeffs["lambda"] = -1
            engine.add_constraint(coeffs, "<=", 0, ("S", pat))
            if dump is not None:
                lp.add_constraint(coeffs, "<=", 0, ("S", pat))
        sol = engine.reoptimize()
        if sol.status != OPTIMAL:
            raise AssertionError("robust flow LP lost feasibility")
    if dump is not None:
        dump(lp)

    x = sol.primal
    value = sol.value
    entries = []
    total_paths = 0
    for p, bp in enumerate(bpaths):
        v = x[("x", p)]
        if v:
            total_paths += bg.realisations(bp)
            if total_paths > lim.paths:
                raise ResourceLimitError("expanded witness paths", lim.paths)
            entries.extend(bg.expand(bp, v))
    flow = PathFlow(entries)
    worst, scen = worst_case_loss(flow, graph, k, EXACTLY_K)
    if flow.value() - worst != value:
        raise AssertionError("expanded flow does not reproduce the LP value")
    return MrfSolution(value, flow, worst, scen, rows)


def solve_rni(instance: MrfInstance, limits: Limits | None = None, symmetry: bool = True,
              dump=None) -> RniSolution:
    """Exact optimum of the interdictor's LP: arc prices ``y`` and a failure distribution ``z``."""
    lim = resolve(limits)
    graph = instance.graph
    k = instance.k
    _check_budget(graph, k)
    bg = BundleGraph(graph, merge=symmetry)
    bpaths = bg.paths(instance.source, instance.sink, lim.paths)
    patterns = _count_patterns(bg.sizes(), bg.interdictable(), k)
    if len(patterns) > lim.scenarios:
        raise ResourceLimitError("scenarios", lim.scenarios)
    lp = LinearProgram("min")
    for i, b in enumerate(bg.bundles):
        lp.add_variable(("y", i))
    for q in range(len(patterns)):
        lp.add_variable(("z", q))
    for p, bp in enumerate(bpaths):
        coeffs = {("y", i): 1 for i in bp}
        for q, pat in enumerate(patterns):
            c = bg.lost_fraction(bp, pat)
            if c:
                coeffs[("z", q)] = c
        lp.add_constraint(coeffs, ">=", 1, ("path", p))
    lp.add_constraint({("z", q): 1 for q in range(len(patterns))}, "==", 1, "distribution")
    lp.set_objective({("y", i): b.capacity * b.size for i, b in enumerate(bg.bundles)})
    if dump is not None:
        dump(lp)
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise AssertionError(f"interdiction LP is {sol.status}")
    y = {}
    for i, b in enumerate(bg.bundles):
        v = sol.primal[("y", i)]
        if v:
            for a in b.members:
                y[a] = v
    z = {}
    expanded = 0
    for q, pat in enumerate(patterns):
        v = sol.primal[("z", q)]
        if not v:
            continue
        choices = [list(combinations(bg.bundles[i].members, j)) for i, j in pat]
        n = 1
        for c in choices:
            n *= len(c)
        expanded += n
        if expanded > lim.scenarios:
            raise ResourceLimitError("expanded scenarios", lim.scenarios)
        for combo in product(*choices):
            s = frozenset(a for part in combo for a in part)
            z[s] = z.get(s, Fraction(0)) + v / n
    return RniSolution(sol.value, y, z)


def rni_violations(instance: MrfInstance, sol: RniSolution, limits: Limits | None = None) -> list[str]:
    """Check ``(y, z)`` against the dual constraints by explicit path enumeration."""
    from ..instances import enumerate_st_paths
    lim = resolve(limits)
    out = []
    if any(v < 0 for v in sol.y.values()) or any(v < 0 for v in sol.z.values()):
        out.append("negative dual variable")
    if sum(sol.z.values(), Fraction(0)) != 1:
        out.append("z is not a distribution")
    k = instance.k
    allowed = set(interdictable_arcs(instance.graph))
    for s in sol.z:
        if len(s) != k or not s <= allowed:
            out.append(f"scenario {sorted(s)!r} is not a k-set of interdictable arcs")
    for p in enumerate_st_paths(instance.graph, instance.source, instance.sink, lim.paths):
        arcs = set(p.arcs)
        lhs = sum((sol.y.get(a, 0) for a in p.arcs), Fraction(0))
        lhs += sum((v for s, v in sol.z.items() if not arcs.isdisjoint(s)), Fraction(0))
        if lhs < 1:
            out.append(f"path {p.arcs!r} uncovered")
    value = sum((instance.graph.capacity(a) * v for a, v in sol.y.items()), Fraction(0))
    if value != sol.value:
        out.append("objective mismatch")
    return out


def decide_mrf_star(instance: MrfInstance, threshold=None, limits: Limits | None = None,
                    symmetry: bool = True) -> Decision:
    """YES iff the robust value reaches ``threshold`` (default: the instance's own)."""
    L = instance.threshold if threshold is None else Fraction(threshold)
    if L is None:
        raise ValidationError("no threshold given")
    sol = solve_mrf(instance, limits, symmetry)
    yes = sol.value >= L
    return Decision(yes, sol.flow if yes else None, sol.value,
                    {"threshold": L, "worst_loss": sol.worst_loss})


def decide_rni_star(instance: MrfInstance, threshold=None, limits: Limits | None = None,
                    symmetry: bool = True) -> Decision:
    """Complement of :func:`decide_mrf_star`: YES iff the interdiction value is below the threshold."""
    d = decide_mrf_star(instance, threshold, limits, symmetry)
    return Decision(not d.answer, None, d.value, d.info)


def solve_mrf_k1(instance: MrfInstance) -> Fraction:
    """Single-failure robust value from the arc-flow LP: max v - lambda, every arc flow <= lambda."""
    if instance.k != 1:
        raise ValidationError("arc-flow formulation needs k = 1")
    g = instance.graph
    lp = LinearProgram("max")
    for a in g.arcs:
        lp.add_variable(("f", a.id), 0, a.capacity)
    lp.add_variable("v", 0, None)
    lp.add_variable("lambda", 0, None)
    for node in g.nodes:
        coeffs: dict = {}
        for a in g.out_arcs(node):
            coeffs[("f", a.id)] = coeffs.get(("f", a.id), 0) + 1
        for a in g.in_arcs(node):
            coeffs[("f", a.id)] = coeffs.get(("f", a.id), 0) - 1
        if node == instance.source:
            coeffs["v"] = -1
        elif node == instance.sink:
            coeffs["v"] = 1
        lp.add_constraint(coeffs, "==", 0, ("flow", node))
    for a in g.arcs:
        if not a.immune:
            lp.add_constraint({("f", a.id): 1, "lambda": -1}, "<=", 0, ("share", a.id))
    lp.set_objective({"v": 1, "lambda": -1})
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise AssertionError(f"arc-flow LP is {sol.status}")
    return sol.value


def best_response(flow: PathFlow, graph: Digraph, k: int, compat: CompatGraph | None = None,
                  mode: str = EXACTLY_K) -> tuple[frozenset, Fraction]:
    """Interdictor's best reply; ties go to the first scenario in enumeration order."""
    value, scen = worst_case_loss(flow, graph, k, mode, compat)
    return scen, value
