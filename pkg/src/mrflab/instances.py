"""Digraphs, robust-flow instances, path flows, scenarios and the loss functional."""

from __future__ import annotations

import heapq
import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import ResourceLimitError, ValidationError
from .lp.model import as_fraction

EXACTLY_K = "exactly_k"
AT_MOST_K = "at_most_k"

_DIGITS = re.compile(r"(\d+)")


def id_key(x: Hashable):
    """Natural sort key: ``a2`` before ``a10``; ints before strings."""
    if isinstance(x, int):
        return (0, x)
    if isinstance(x, str):
        return (1, tuple((0, int(p), "") if p.isdigit() else (1, 0, p)
                         for p in _DIGITS.split(x) if p))
    if isinstance(x, tuple):
        return (2, tuple(id_key(p) for p in x))
    return (3, repr(x))


@dataclass(frozen=True)
class Arc:
    id: Hashable
    tail: Hashable
    head: Hashable
    capacity: Fraction = Fraction(1)
    immune: bool = False

    def __post_init__(self):
        object.__setattr__(self, "capacity", as_fraction(self.capacity))
        if self.capacity < 0:
            raise ValidationError("negative capacity", f"arc {self.id!r}")
        if self.tail == self.head:
            raise ValidationError("self-loop", f"arc {self.id!r}")


@dataclass(frozen=True)
class Digraph:
    nodes: tuple
    arcs: tuple

    def __post_init__(self):
        nodes = tuple(self.nodes)
        arcs = tuple(self.arcs)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", arcs)
        node_set = set(nodes)
        if len(node_set) != len(nodes):
            raise ValidationError("duplicate node id", "nodes")
        by_id: dict = {}
        out: dict = {v: [] for v in nodes}
        inn: dict = {v: [] for v in nodes}
        for a in arcs:
            if a.id in by_id:
                raise ValidationError("duplicate arc id", f"arc {a.id!r}")
            for end in (a.tail, a.head):
                if end not in node_set:
                    raise ValidationError(f"undeclared node {end!r}", f"arc {a.id!r}")
            by_id[a.id] = a
            out[a.tail].append(a)
            inn[a.head].append(a)
        for d in (out, inn):
            for v in d:
                d[v].sort(key=lambda a: id_key(a.id))
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_out", {v: tuple(x) for v, x in out.items()})
        object.__setattr__(self, "_in", {v: tuple(x) for v, x in inn.items()})

    def arc(self, arc_id: Hashable) -> Arc:
        try:
            return self._by_id[arc_id]
        except KeyError:
            raise ValidationError(f"unknown arc {arc_id!r}") from None

    def has_arc(self, arc_id: Hashable) -> bool:
        return arc_id in self._by_id

    def out_arcs(self, v) -> tuple:
        return self._out[v]

    def in_arcs(self, v) -> tuple:
        return self._in[v]

    @property
    def arc_ids(self) -> list:
        return [a.id for a in self.arcs]

    def capacity(self, arc_id) -> Fraction:
        return self.arc(arc_id).capacity

    def max_capacity(self) -> Fraction:
        return max((a.capacity for a in self.arcs), default=Fraction(0))


@dataclass(frozen=True)
class CompatGraph:
    edges: frozenset = frozenset()

    def __post_init__(self):
        edges = set()
        adj: dict = {}
        for e in self.edges:
            pair = frozenset(e)
            if len(pair) != 2:
                raise ValidationError(f"compat edge {tuple(e)!r} is a self-pair", "compat")
            edges.add(pair)
            a, b = tuple(pair)
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "_adj", {v: frozenset(n) for v, n in adj.items()})

    def adjacent(self, a, b) -> bool:
        return b in self._adj.get(a, ())

    def neighbors(self, a) -> frozenset:
        return self._adj.get(a, frozenset())

    def degree(self, a) -> int:
        return len(self._adj.get(a, ()))

    def is_clique(self, arcs: Iterable) -> bool:
        arcs = list(arcs)
        return all(self.adjacent(a, b) for a, b in combinations(arcs, 2))

    def check_against(self, graph: Digraph) -> None:
        for e in self.edges:
            for a in e:
                if not graph.has_arc(a):
                    raise ValidationError(f"compat edge uses unknown arc {a!r}", "compat")

    def sorted_edges(self) -> list[tuple]:
        return sorted((tuple(sorted(e, key=id_key)) for e in self.edges),
                      key=lambda p: (id_key(p[0]), id_key(p[1])))


@dataclass(frozen=True)
class MrfInstance:
    graph: Digraph
    source: Hashable
    sink: Hashable
    k: int
    threshold: Fraction | None = None

    def __post_init__(self):
        if self.source == self.sink:
            raise ValidationError("source equals sink")
        for v in (self.source, self.sink):
            if v not in self.graph._out:
                raise ValidationError(f"unknown node {v!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValidationError("budget k must be a positive integer")
        if self.threshold is not None:
            object.__setattr__(self, "threshold", as_fraction(self.threshold))


@dataclass(frozen=True)
class MrfRInstance:
    graph: Digraph
    source: Hashable
    sink: Hashable
    k: int
    compat: CompatGraph
    theta: Fraction
    integral: bool = False

    def __post_init__(self):
        if self.source == self.sink:
            raise ValidationError("source equals sink")
        for v in (self.source, self.sink):
            if v not in self.graph._out:
                raise ValidationError(f"unknown node {v!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValidationError("budget k must be a positive integer")
        object.__setattr__(self, "theta", as_fraction(self.theta))
        if self.theta < 0:
            raise ValidationError("demand must be nonnegative", "theta")
        for a in self.graph.arcs:
            if a.capacity != 1:
                raise ValidationError("capacities must all equal 1", f"arc {a.id!r}")
            if a.immune:
                raise ValidationError("immune arcs are not allowed here", f"arc {a.id!r}")
        self.compat.check_against(self.graph)
        topological_node_order(self.graph)


@dataclass(frozen=True)
class Commodity:
    id: Hashable
    source: Hashable
    sink: Hashable
    demand: Fraction

    def __post_init__(self):
        object.__setattr__(self, "demand", as_fraction(self.demand))
        if self.demand <= 0:
            raise ValidationError("demand must be positive", f"commodity {self.id!r}")
        if self.source == self.sink:
            raise ValidationError("source equals sink", f"commodity {self.id!r}")


@dataclass(frozen=True)
class MrfMInstance:
    graph: Digraph
    k: int
    commodities: tuple
    i0: Hashable

    def __post_init__(self):
        object.__setattr__(self, "commodities", tuple(self.commodities))
        ids = [c.id for c in self.commodities]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate commodity id")
        if self.i0 not in ids:
            raise ValidationError("designated commodity is not declared", "i0")
        if not self.graph.arcs:
            raise ValidationError("graph has no arcs")
        if not isinstance(self.k, int) or self.k < 1:
            raise ValidationError("budget k must be a positive integer")
        for c in self.commodities:
            for v in (c.source, c.sink):
                if v not in self.graph._out:
                    raise ValidationError(f"unknown node {v!r}", f"commodity {c.id!r}")

    @property
    def M(self) -> Fraction:
        return self.graph.max_capacity()

    def commodity(self, cid) -> Commodity:
        for c in self.commodities:
            if c.id == cid:
                return c
        raise ValidationError(f"unknown commodity {cid!r}")


@dataclass(frozen=True)
class Path:
    arcs: tuple
    commodity: Hashable = None

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self):
        return len(self.arcs)

    def __contains__(self, arc_id):
        return arc_id in self.arcs

    def sort_key(self):
        return (id_key(self.commodity), tuple(id_key(a) for a in self.arcs))


class PathFlow(Mapping):
    """Sparse, immutable map from paths to positive rational values."""

    __slots__ = ("_d",)

    def __init__(self, entries: Mapping | Iterable = ()):
        d = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for p, v in items:
            if not isinstance(p, Path):
                p = Path(tuple(p))
            v = as_fraction(v)
            if v < 0:
                raise ValidationError(f"negative flow value on path {p.arcs!r}")
            if v:
                d[p] = d.get(p, Fraction(0)) + v
        self._d = {p: d[p] for p in sorted(d, key=Path.sort_key)}

    def __getitem__(self, p):
        return self._d[p]

    def __iter__(self) -> Iterator[Path]:
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __repr__(self):
        return f"PathFlow({self._d!r})"

    def __eq__(self, other):
        if isinstance(other, PathFlow):
            return self._d == other._d
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._d.items()))

    def value(self, commodity=...) -> Fraction:
        return sum((v for p, v in self._d.items() if commodity is ... or p.commodity == commodity),
                   Fraction(0))

    def arc_flows(self) -> dict:
        out: dict = {}
        for p, v in self._d.items():
            for a in p.arcs:
                out[a] = out.get(a, Fraction(0)) + v
        return out

    def restrict(self, commodity) -> "PathFlow":
        return PathFlow({p: v for p, v in self._d.items() if p.commodity == commodity})

    def __add__(self, other: "PathFlow") -> "PathFlow":
        return PathFlow(list(self._d.items()) + list(other.items()))

    def scaled(self, factor) -> "PathFlow":
        factor = as_fraction(factor)
        return PathFlow({p: v * factor for p, v in self._d.items()})


Scenario = frozenset


def loss(flow: PathFlow, scenario: Iterable) -> Fraction:
    """Flow on paths that meet ``scenario`` (each path counted once)."""
    s = scenario if isinstance(scenario, (set, frozenset)) else frozenset(scenario)
    return sum((v for p, v in flow.items() if not s.isdisjoint(p.arcs)), Fraction(0))


def arc_flow(flow: PathFlow, arc_id) -> Fraction:
    return sum((v for p, v in flow.items() if arc_id in p.arcs), Fraction(0))


# -- orders and enumeration ---------------------------------------------------

def topological_node_order(graph: Digraph) -> list:
    """Deterministic topological order (smallest id first among ready nodes)."""
    indeg = {v: len(graph.in_arcs(v)) for v in graph.nodes}
    heap = [(id_key(v), i, v) for i, v in enumerate(graph.nodes) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i, v = heapq.heappop(heap)
        order.append(v)
        for a in graph.out_arcs(v):
            indeg[a.head] -= 1
            if indeg[a.head] == 0:
                heapq.heappush(heap, (id_key(a.head), graph.nodes.index(a.head), a.head))
    if len(order) != len(graph.nodes):
        raise ValidationError(f"graph has a cycle through {find_cycle(graph)!r}")
    return order


def find_cycle(graph: Digraph) -> list:
    color = {v: 0 for v in graph.nodes}
    stack_arcs: list = []

    def visit(v):
        color[v] = 1
        for a in graph.out_arcs(v):
            stack_arcs.append(a.id)
            if color[a.head] == 1:
                cyc = []
                for aid in reversed(stack_arcs):
                    cyc.append(aid)
                    if graph.arc(aid).tail == a.head:
                        break
                return list(reversed(cyc))
            if color[a.head] == 0:
                found = visit(a.head)
                if found:
                    return found
            stack_arcs.pop()
        color[v] = 2
        return None

    for v in sorted(graph.nodes, key=id_key):
        if color[v] == 0:
            found = visit(v)
            if found:
                return found
    return []


def topological_arc_order(graph: Digraph, last: Sequence = ()) -> list:
    """Arcs in increasing order: later arcs never precede earlier ones on a path.

    Arcs are ranked by the topological position of their tail, then head,
    then id; arcs listed in ``last`` are moved to the end in the given order.
    """
    pos = {v: i for i, v in enumerate(topological_node_order(graph))}
    last_set = set(last)
    body = [a for a in graph.arcs if a.id not in last_set]
    body.sort(key=lambda a: (pos[a.tail], pos[a.head], id_key(a.id)))
    return [a.id for a in body] + list(last)


def enumerate_st_paths(graph: Digraph, source, sink, limit: int | None = None,
                       commodity=None) -> list[Path]:
    """All simple source-sink paths, lexicographic by arc-id sequence."""
    out: list[Path] = []
    if source == sink:
        return out
    on_path = {source}
    arcs: list = []

    def rec(v):
        for a in graph.out_arcs(v):
            if a.head in on_path:
                continue
            arcs.append(a.id)
            if a.head == sink:
                out.append(Path(tuple(arcs), commodity))
                if limit is not None and len(out) > limit:
                    raise ResourceLimitError("s-t paths", limit)
            else:
                on_path.add(a.head)
                rec(a.head)
                on_path.discard(a.head)
            arcs.pop()

    rec(source)
    return out


def interdictable_arcs(graph: Digraph) -> list:
    return sorted((a.id for a in graph.arcs if not a.immune), key=id_key)


def iter_scenarios(arc_ids: Sequence, k: int, mode: str = EXACTLY_K,
                   compat: CompatGraph | None = None) -> Iterator[frozenset]:
    arc_ids = sorted(arc_ids, key=id_key)
    if mode == EXACTLY_K:
        if compat is not None:
            raise ValidationError("exactly_k scenarios are not restricted by compatibility")
        if k > len(arc_ids):
            raise ValidationError(f"budget {k} exceeds the {len(arc_ids)} interdictable arcs")
        for c in combinations(arc_ids, k):
            yield frozenset(c)
        return
    if mode != AT_MOST_K:
        raise ValidationError(f"unknown scenario mode {mode!r}")
    if compat is None:
        for size in range(min(k, len(arc_ids)) + 1):
            for c in combinations(arc_ids, size):
                yield frozenset(c)
        return
    index = {a: i for i, a in enumerate(arc_ids)}
    by_size: list[list[tuple]] = [[()]]
    for size in range(1, k + 1):
        nxt = []
        for clique in by_size[-1]:
            start = index[clique[-1]] + 1 if clique else 0
            for a in arc_ids[start:]:
                if all(compat.adjacent(a, b) for b in clique):
                    nxt.append(clique + (a,))
        if not nxt:
            break
        by_size.append(nxt)
    for layer in by_size:
        for c in layer:
            yield frozenset(c)


def enumerate_scenarios(graph: Digraph, k: int, mode: str = EXACTLY_K,
                        compat: CompatGraph | None = None,
                        limit: int | None = None) -> list[frozenset]:
    """Failure sets over non-immune arcs.

    ``exactly_k``: every k-subset.  ``at_most_k``: every subset of size at
    most k, restricted to cliques of ``compat`` when given (the empty set
    and singletons always qualify).
    """
    out = []
    for s in iter_scenarios(interdictable_arcs(graph), k, mode, compat):
        out.append(s)
        if limit is not None and len(out) > limit:
            raise ResourceLimitError("scenarios", limit)
    return out


def scenario_sort_key(s: Iterable):
    items = sorted(s, key=id_key)
    return (len(items), tuple(id_key(a) for a in items))


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    element: Hashable
    detail: str = ""


def check_path(graph: Digraph, path: Path, source, sink) -> None:
    """Raise :class:`ValidationError` unless ``path`` is a simple source-sink path."""
    where = f"path {path.arcs!r}"
    if not path.arcs:
        raise ValidationError("empty path", where)
    seen = {source}
    at = source
    for aid in path.arcs:
        if not graph.has_arc(aid):
            raise ValidationError(f"unknown arc {aid!r}", where)
        a = graph.arc(aid)
        if a.tail != at:
            raise ValidationError(f"arc {aid!r} does not continue the path", where)
        if a.head in seen:
            raise ValidationError(f"node {a.head!r} repeated", where)
        seen.add(a.head)
        at = a.head
    if at != sink:
        raise ValidationError(f"path ends at {at!r}, not {sink!r}", where)


def _endpoints(instance, path: Path):
    if isinstance(instance, MrfMInstance):
        if path.commodity is None:
            raise ValidationError("path lacks a commodity", f"path {path.arcs!r}")
        c = instance.commodity(path.commodity)
        return c.source, c.sink
    return instance.source, instance.sink


def flow_violations(flow: PathFlow, instance, require_demand: bool = True) -> list[Violation]:
    """Capacity and demand violations; invalid paths raise ValidationError."""
    graph = instance.graph
    for p in flow:
        s, t = _endpoints(instance, p)
        check_path(graph, p, s, t)
    out = []
    for aid, v in sorted(flow.arc_flows().items(), key=lambda kv: id_key(kv[0])):
        cap = graph.capacity(aid)
        if v > cap:
            out.append(Violation("capacity", aid, f"flow {v} exceeds capacity {cap}"))
    if require_demand:
        if isinstance(instance, MrfRInstance):
            if flow.value() != instance.theta:
                out.append(Violation("demand", None, f"value {flow.value()} != {instance.theta}"))
        elif isinstance(instance, MrfMInstance):
            for c in instance.commodities:
                got = flow.value(c.id)
                if got != c.demand:
                    out.append(Violation("demand", c.id, f"value {got} != {c.demand}"))
    if isinstance(instance, MrfRInstance) and instance.integral:
        for p, v in flow.items():
            if v.denominator != 1:
                out.append(Violation("integrality", p.arcs, f"value {v}"))
    return out


def is_feasible(flow: PathFlow, instance, require_demand: bool = True) -> bool:
    return not flow_violations(flow, instance, require_demand)


def max_loss(flow: PathFlow, scenarios: Iterable) -> tuple[Fraction, frozenset | None]:
    """Largest loss over an explicit scenario list; first maximiser wins."""
    best, arg = Fraction(-1), None
    for s in scenarios:
        v = loss(flow, s)
        if v > best:
            best, arg = v, s
    if arg is None:
        return Fraction(0), None
    return best, arg


class _CoFlow:
    """Flow shared by arc subsets, for exact incremental loss evaluation.

    ``f[T]`` is the flow on paths containing every arc of ``T``; the loss
    gained by adding arc ``a`` to a scenario ``S`` is
    ``sum_{T subset S} (-1)^|T| f[T + a]``.
    """

    def __init__(self, flow: PathFlow, index: dict, k: int):
        f: dict = {}
        for p, v in flow.items():
            idx = sorted(index[a] for a in p.arcs if a in index)
            for size in range(1, min(k, len(idx)) + 1):
                for t in combinations(idx, size):
                    f[t] = f.get(t, 0) + v
        self.f = f

    def single(self, i) -> Fraction:
        return self.f.get((i,), 0)

    def gain(self, chosen: tuple, i) -> Fraction:
        f = self.f
        total = Fraction(0)
        for size in range(len(chosen) + 1):
            sign = -1 if size % 2 else 1
            for t in combinations(chosen, size):
                key = tuple(sorted(t + (i,)))
                v = f.get(key)
                if v:
                    total += sign * v
        return total


def worst_case_loss(flow: PathFlow, graph: Digraph, k: int, mode: str = EXACTLY_K,
                    compat: CompatGraph | None = None) -> tuple[Fraction, frozenset]:
    """Exact ``max_S loss(flow, S)`` over the scenario family, with its first maximiser.

    Scenarios are ordered by size, then lexicographically by arc id (the
    order of :func:`enumerate_scenarios`).  Branch and bound over the
    arcs carrying flow keeps this cheap on large flows.
    """
    arcs = interdictable_arcs(graph)
    if mode == EXACTLY_K:
        if compat is not None:
            raise ValidationError("exactly_k scenarios are not restricted by compatibility")
        if k > len(arcs):
            raise ValidationError(f"budget {k} exceeds the {len(arcs)} interdictable arcs")
        sizes = [k]
    elif mode == AT_MOST_K:
        sizes = list(range(0, min(k, len(arcs)) + 1))
    else:
        raise ValidationError(f"unknown scenario mode {mode!r}")
    index = {a: i for i, a in enumerate(arcs)}
    co = _CoFlow(flow, index, max(sizes) if sizes else 0)
    single = [co.single(i) for i in range(len(arcs))]
    n = len(arcs)
    # suffix_top[p] = the largest single-arc flows among arcs p.., descending
    top_k = max(sizes) if sizes else 0
    suffix_top: list[list] = [[] for _ in range(n + 1)]
    for p in range(n - 1, -1, -1):
        merged = sorted(suffix_top[p + 1] + [single[p]], reverse=True)[:top_k]
        suffix_top[p] = merged

    def search(size: int, target: Fraction | None):
        """Best (or first reaching ``target``) scenario of exactly ``size`` arcs."""
        best_val = Fraction(-1)
        best_set: tuple | None = None
        chosen: list = []

        def rec(start: int, current: Fraction) -> bool:
            nonlocal best_val, best_set
            need = size - len(chosen)
            if need == 0:
                if target is not None:
                    if current == target:
                        best_val, best_set = current, tuple(chosen)
                        return True
                    return False
                if current > best_val:
                    best_val, best_set = current, tuple(chosen)
                return False
            if n - start < need:
                return False
            for i in range(start, n - need + 1):
                ub = current + sum(suffix_top[i][:need])
                if (ub < target) if target is not None else (ub <= best_val):
                    break
                if compat is not None and chosen and not all(
                        compat.adjacent(arcs[i], arcs[j]) for j in chosen):
                    continue
                g = co.gain(tuple(chosen), i) if single[i] else Fraction(0)
                chosen.append(i)
                done = rec(i + 1, current + g)
                chosen.pop()
                if done:
                    return True
            return False

        rec(0, Fraction(0))
        return best_val, best_set

    best = Fraction(-1)
    for size in sizes:
        v, s = search(size, None)
        if s is not None and v > best:
            best = v
    if best < 0:
        return Fraction(0), frozenset()
    for size in sizes:
        v, s = search(size, best)
        if s is not None:
            return best, frozenset(arcs[i] for i in s)
    raise AssertionError("maximiser vanished")


def witness_problems(instance, flow: PathFlow, threshold=None) -> list[str]:
    """Reasons why ``flow`` does not certify a YES answer; empty when it does.

    MRF: feasible and ``value - worst loss over |S| = k`` reaches the
    threshold.  MRF-R: value theta and every clique failure loses at most
    ``k - 1``.  MRF-M: all demands met and every ``|S| <= k`` loses at most
    ``kM - 1``.
    """
    try:
        problems = [f"{v.kind} {v.element!r}: {v.detail}"
                    for v in flow_violations(flow, instance, require_demand=True)]
    except ValidationError as exc:
        return [str(exc)]
    if isinstance(instance, MrfInstance):
        L = instance.threshold if threshold is None else as_fraction(threshold)
        if L is None:
            return problems + ["no threshold to compare against"]
        worst, _ = worst_case_loss(flow, instance.graph, instance.k, EXACTLY_K)
        if flow.value() - worst < L:
            problems.append(f"surviving flow {flow.value() - worst} is below {L}")
    elif isinstance(instance, MrfRInstance):
        worst, s = worst_case_loss(flow, instance.graph, instance.k, AT_MOST_K, instance.compat)
        if worst > instance.k - 1:
            problems.append(f"clique failure {sorted(s, key=id_key)!r} loses {worst}")
    elif isinstance(instance, MrfMInstance):
        bound = instance.k * instance.M - 1
        worst, s = worst_case_loss(flow, instance.graph, instance.k, AT_MOST_K)
        if worst > bound:
            problems.append(f"failure {sorted(s, key=id_key)!r} loses {worst} > {bound}")
    else:
        raise ValidationError(f"unsupported instance type {type(instance).__name__}")
    return problems
