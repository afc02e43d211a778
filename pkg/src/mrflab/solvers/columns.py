"""Path-flow LPs with lazily generated path columns and failure rows.

Networks produced by the reductions have far too many simple paths to
list, so paths enter the LP only when they price out.  Every term of a
path's reduced cost (arc price, failure-row price) is nonnegative and
only grows as the path is extended, so a depth-first search that drops a
partial path once it costs as much as the commodity's demand dual is an
exact pricing oracle.  Failure rows are separated with
:class:`~mrflab.solvers.quotient.PatternSearch`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from ..errors import ResourceLimitError
from ..instances import Arc, CompatGraph, Digraph, Path, PathFlow, id_key, interdictable_arcs
from ..lp import LinearProgram, OPTIMAL, SimplexEngine
from .limits import Limits, resolve
from .maxflow import max_flow_arcs
from .quotient import PatternSearch

COLUMNS_PER_DEMAND = 6
CUTS_PER_ROUND = 8


@dataclass(frozen=True)
class Demand:
    id: Hashable
    source: Hashable
    sink: Hashable
    amount: Fraction


@dataclass(frozen=True)
class Robustness:
    """Failure rows ``loss(x, S) <= lambda`` for every ``S`` with ``|S| <= k``."""
    k: int
    compat: CompatGraph | None = None


@dataclass
class PathLpResult:
    feasible: bool
    value: Fraction | None = None
    flow: PathFlow = field(default_factory=PathFlow)
    worst_loss: Fraction | None = None
    stopped_early: bool = False
    columns: int = 0
    rows: int = 0


class PathFlowLP:
    """Minimise ``lambda`` (robust mode) or a nonnegative arc cost over flows meeting demands.

    The commodity attached to each returned path is the demand id, or
    ``None`` when ``single`` is set.
    """

    def __init__(self, graph: Digraph, demands: Sequence[Demand],
                 robust: Robustness | None = None, arc_cost: Mapping | None = None,
                 limits: Limits | None = None, single: bool = False):
        self.graph = graph
        self.demands = list(demands)
        self.robust = robust
        self.arc_cost = {a: Fraction(c) for a, c in (arc_cost or {}).items()}
        if any(c < 0 for c in self.arc_cost.values()):
            raise ValueError("arc costs must be nonnegative")
        self.limits = resolve(limits)
        self.single = single
        self.paths: list[tuple[Hashable, tuple]] = []   # (demand id, arc tuple)
        self._known: set = set()
        self._nodes = 0
        self._reach = {d.id: self._can_reach(d.sink) for d in self.demands}
        self._scenarios: list[frozenset] = []

    # -- plumbing ----------------------------------------------------------
    def _can_reach(self, sink) -> set:
        seen = {sink}
        queue = deque([sink])
        while queue:
            v = queue.popleft()
            for a in self.graph.in_arcs(v):
                if a.tail not in seen:
                    seen.add(a.tail)
                    queue.append(a.tail)
        return seen

    def _shortest(self, d: Demand) -> tuple | None:
        prev = {d.source: None}
        queue = deque([d.source])
        while queue:
            v = queue.popleft()
            if v == d.sink:
                break
            for a in self.graph.out_arcs(v):
                if a.head not in prev:
                    prev[a.head] = a
                    queue.append(a.head)
        if d.sink not in prev:
            return None
        arcs = []
        v = d.sink
        while prev[v] is not None:
            arcs.append(prev[v].id)
            v = prev[v].tail
        return tuple(reversed(arcs))

    def _register(self, did, arcs: tuple) -> int:
        key = (did, arcs)
        if key in self._known:
            raise AssertionError("path priced out twice")
        self._known.add(key)
        self.paths.append(key)
        if len(self.paths) > self.limits.paths:
            raise ResourceLimitError("path columns", self.limits.paths)
        return len(self.paths) - 1

    def _column(self, p: int) -> dict:
        did, arcs = self.paths[p]
        coeffs = {("demand", did): 1}
        for a in arcs:
            coeffs[("cap", a)] = coeffs.get(("cap", a), 0) + 1
        on = set(arcs)
        for s in self._scenarios:
            if not on.isdisjoint(s):
                coeffs[("S", s)] = 1
        return coeffs

    def _cost(self, p: int) -> Fraction:
        return sum((self.arc_cost.get(a, 0) for a in self.paths[p][1]), Fraction(0))

    def _greedy_routing(self) -> tuple[list[tuple[Hashable, tuple]], bool]:
        """Route demands one by one by max flow in the leftover capacity.

        Small demands go first, then large ones.  Returns the paths of the
        first order in which every demand fits and ``True``; otherwise the
        paths of both partial attempts and ``False``.
        """
        partial = []
        for sign in (1, -1):
            order = sorted(self.demands, key=lambda d: (sign * d.amount, id_key(d.id)))
            found, complete = self._route_in_order(order)
            if complete:
                return found, True
            partial.extend(found)
        return partial, False

    def _route_in_order(self, order: list[Demand]) -> tuple[list[tuple[Hashable, tuple]], bool]:
        left = {a.id: a.capacity for a in self.graph.arcs}
        found = []
        complete = True
        for d in order:
            if not d.amount:
                continue
            arcs = tuple(Arc(a.id, a.tail, a.head, left[a.id]) for a in self.graph.arcs)
            value, flow = max_flow_arcs(Digraph(self.graph.nodes, arcs), d.source, d.sink)
            if value < d.amount:
                complete = False
            if not value:
                continue
            scale = min(Fraction(1), d.amount / value)
            flow = {a: v * scale for a, v in flow.items()}
            for a, v in flow.items():
                left[a] -= v
            for path in _decompose(self.graph, flow, d.source, d.sink):
                found.append((d.id, path))
        return found, complete

    # -- pricing -----------------------------------------------------------
    def _price(self, dual: Mapping, deficit: bool) -> list[tuple[Hashable, tuple]]:
        # stage 1 maximises routed flow, so its duals carry the opposite sign
        sign = 1 if deficit else -1
        weight = {}
        for a in self.graph.arcs:
            w = sign * dual.get(("cap", a.id), 0)
            if not deficit:
                w += self.arc_cost.get(a.id, 0)
            weight[a.id] = w
        by_arc: dict = {}
        for sid, s in enumerate(self._scenarios):
            w = -dual.get(("S", s), 0)
            if w:
                for a in s:
                    by_arc.setdefault(a, []).append((sid, w))
        found = []
        for d in self.demands:
            if deficit:
                mu = 1 - dual.get(("demand", d.id), 0)
            else:
                mu = dual.get(("demand", d.id), 0)
            if mu <= 0:
                continue
            found.extend((d.id, arcs) for arcs in self._price_one(d, mu, weight, by_arc))
        return found

    def _price_one(self, d: Demand, mu: Fraction, weight, by_arc) -> list[tuple]:
        reach = self._reach[d.id]
        out: list[tuple] = []
        arcs: list = []
        hit: dict = {}
        on_path = {d.source}
        graph = self.graph
        limit = self.limits.search

        def rec(v, cost):
            self._nodes += 1
            if self._nodes > limit:
                raise ResourceLimitError("pricing search nodes", limit)
            succ = [a for a in graph.out_arcs(v) if a.head in reach and a.head not in on_path]
            succ.sort(key=lambda a: (weight[a.id], id_key(a.id)))
            for a in succ:
                extra = weight[a.id]
                fresh = []
                for sid, w in by_arc.get(a.id, ()):
                    if sid not in hit:
                        extra += w
                        fresh.append(sid)
                c = cost + extra
                if c >= mu:
                    continue
                arcs.append(a.id)
                for sid in fresh:
                    hit[sid] = True
                if a.head == d.sink:
                    key = tuple(arcs)
                    if (d.id, key) not in self._known:
                        out.append(key)
                else:
                    on_path.add(a.head)
                    rec(a.head, c)
                    on_path.discard(a.head)
                for sid in fresh:
                    del hit[sid]
                arcs.pop()
                if len(out) >= COLUMNS_PER_DEMAND:
                    return

        rec(d.source, Fraction(0))
        return out

    # -- LP stages -----------------------------------------------------------
    def _base_lp(self, deficit: bool) -> LinearProgram:
        """Stage 1 (``deficit``) maximises routed flow under demand caps; stage 2 is the real LP."""
        lp = LinearProgram("max" if deficit else "min")
        for p in range(len(self.paths)):
            lp.add_variable(("x", p))
        robust = self.robust is not None and not deficit
        if robust:
            lp.add_variable("lambda")
        cols = [self._column(p) for p in range(len(self.paths))]
        rows: dict = {}
        for p, coeffs in enumerate(cols):
            for row, a in coeffs.items():
                rows.setdefault(row, {})[("x", p)] = a
        for d in self.demands:
            lp.add_constraint(rows.get(("demand", d.id), {}), "<=" if deficit else "==",
                              d.amount, ("demand", d.id))
        for a in sorted(self.graph.arcs, key=lambda a: id_key(a.id)):
            lp.add_constraint(rows.get(("cap", a.id), {}), "<=", a.capacity, ("cap", a.id))
        if robust:
            for s in self._scenarios:
                coeffs = dict(rows.get(("S", s), {}))
                coeffs["lambda"] = -1
                lp.add_constraint(coeffs, "<=", 0, ("S", s))
        if deficit:
            lp.set_objective({("x", p): 1 for p in range(len(self.paths))})
        elif robust:
            lp.set_objective({"lambda": 1})
        else:
            lp.set_objective({("x", p): self._cost(p) for p in range(len(self.paths))})
        return lp

    def _price_loop(self, engine: SimplexEngine, sol, deficit: bool):
        while True:
            new = self._price(sol.dual, deficit)
            if not new:
                return sol
            for did, arcs in new:
                p = self._register(did, arcs)
                cost = 1 if deficit else self._cost(p)
                engine.add_column(("x", p), self._column(p), cost)
            sol = engine.resume()
            if sol.status != OPTIMAL:
                raise AssertionError(f"path LP became {sol.status}")

    def _flow(self, primal: Mapping) -> PathFlow:
        entries = []
        for p, (did, arcs) in enumerate(self.paths):
            v = primal.get(("x", p), 0)
            if v:
                entries.append((Path(arcs, None if self.single else did), v))
        return PathFlow(entries)

    def solve(self, target: Fraction | None = None) -> PathLpResult:
        """Optimise; with ``target`` (robust mode) stop once ``lambda* <= target`` is settled."""
        for d in self.demands:
            if d.amount == 0:
                continue
            arcs = self._shortest(d)
            if arcs is None:
                return PathLpResult(False)
            self._register(d.id, arcs)

        seeded, routed = self._greedy_routing()
        for did, arcs in seeded:
            if (did, arcs) not in self._known:
                self._register(did, arcs)

        # stage 1: can the demands be met at all?
        if not routed and any(d.amount for d in self.demands):
            engine = SimplexEngine(self._base_lp(deficit=True))
            sol = engine.solve()
            sol = self._price_loop(engine, sol, deficit=True)
            if sol.value < sum((d.amount for d in self.demands), Fraction(0)):
                return PathLpResult(False, columns=len(self.paths))

        # stage 2: the real objective
        engine = SimplexEngine(self._base_lp(deficit=False))
        sol = engine.solve()
        if sol.status != OPTIMAL:
            raise AssertionError(f"path LP is {sol.status}")
        search = None
        index = {}
        if self.robust is not None:
            arcs = interdictable_arcs(self.graph)
            index = {a: i for i, a in enumerate(arcs)}
            compat = self.robust.compat
            adjacent = None
            if compat is not None:
                adjacent = lambda i, j: compat.adjacent(arcs[i], arcs[j])  # noqa: E731
            search = PatternSearch([1] * len(arcs), [True] * len(arcs), self.robust.k,
                                   adjacent, node_limit=self.limits.search)
        while True:
            sol = self._price_loop(engine, sol, deficit=False)
            if search is None:
                flow = self._flow(sol.primal)
                return PathLpResult(True, sol.value, flow, None, False, len(self.paths), 0)
            lam = sol.primal["lambda"]
            if target is not None and lam > target:
                # every column prices out, so lambda is a lower bound on the optimum
                return PathLpResult(True, lam, PathFlow(), None, True,
                                    len(self.paths), len(self._scenarios))
            flows = []
            for p, (did, arcs_p) in enumerate(self.paths):
                v = sol.primal.get(("x", p), 0)
                if v:
                    flows.append(([index[a] for a in arcs_p if a in index], v))
            cuts = search.top(flows, lam, CUTS_PER_ROUND)
            if not cuts or (target is not None and cuts[0][0] <= target):
                flow = self._flow(sol.primal)
                worst = cuts[0][0] if cuts else lam
                return PathLpResult(True, lam if not cuts else None, flow, worst,
                                    bool(cuts), len(self.paths), len(self._scenarios))
            for _loss, pat in cuts:
                s = frozenset(arcs[i] for i, _j in pat)
                self._scenarios.append(s)
                if len(self._scenarios) > self.limits.scenarios:
                    raise ResourceLimitError("scenario constraints", self.limits.scenarios)
                coeffs = {"lambda": -1}
                for p, (did, arcs_p) in enumerate(self.paths):
                    if not s.isdisjoint(arcs_p):
                        coeffs[("x", p)] = 1
                engine.add_constraint(coeffs, "<=", 0, ("S", s))
            sol = engine.reoptimize()
            if sol.status != OPTIMAL:
                raise AssertionError(f"robust path LP became {sol.status}")


def _decompose(graph: Digraph, flow: dict, source, sink) -> list[tuple]:
    """Split an arc flow into source-sink paths, dropping any circulation."""
    flow = dict(flow)
    paths = []
    while True:
        arcs: list = []
        seen = {source: 0}
        v = source
        while v != sink:
            nxt = next((a for a in graph.out_arcs(v) if flow.get(a.id, 0) > 0), None)
            if nxt is None:
                return paths
            arcs.append(nxt.id)
            v = nxt.head
            if v in seen:
                # cancel the cycle and restart the walk
                cycle = arcs[seen[v]:]
                delta = min(flow[a] for a in cycle)
                for a in cycle:
                    flow[a] -= delta
                break
            seen[v] = len(arcs)
        else:
            delta = min(flow[a] for a in arcs)
            for a in arcs:
                flow[a] -= delta
            paths.append(tuple(arcs))
