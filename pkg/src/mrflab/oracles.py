"""Brute-force ground truth for graph problems and integral unit flows.

Everything here enumerates exhaustively and refuses, with a
:class:`~mrflab.errors.ResourceLimitError`, to go past its size guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Iterator

from .errors import ResourceLimitError, ValidationError
from .instances import Digraph, enumerate_st_paths, id_key
from .lp import LinearProgram, OPTIMAL, solve_lp

MAX_VERTICES = 16
MAX_SUBSETS = 2_000_000


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: tuple
    edges: frozenset

    def __init__(self, vertices: Iterable, edges: Iterable):
        vs = tuple(sorted(set(vertices), key=id_key))
        es = set()
        known = set(vs)
        for e in edges:
            u, v = tuple(e)
            if u == v:
                raise ValidationError(f"self-loop at {u!r}")
            if u not in known or v not in known:
                raise ValidationError(f"edge {{{u!r}, {v!r}}} uses an unknown vertex")
            pair = frozenset((u, v))
            if pair in es:
                raise ValidationError(f"duplicate edge {{{u!r}, {v!r}}}")
            es.add(pair)
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", frozenset(es))

    def adjacent(self, u, v) -> bool:
        return frozenset((u, v)) in self.edges

    def sorted_edges(self) -> list[tuple]:
        """Edges as ordered pairs, both endpoints in vertex order, lexicographic."""
        pos = {v: i for i, v in enumerate(self.vertices)}
        pairs = [tuple(sorted(e, key=pos.__getitem__)) for e in self.edges]
        return sorted(pairs, key=lambda p: (pos[p[0]], pos[p[1]]))

    def neighbors(self, v) -> set:
        return {u for e in self.edges if v in e for u in e if u != v}

    def is_clique(self, vs: Iterable) -> bool:
        return all(self.adjacent(u, v) for u, v in combinations(list(vs), 2))

    def is_independent(self, vs: Iterable) -> bool:
        return not any(self.adjacent(u, v) for u, v in combinations(list(vs), 2))

    @classmethod
    def complete(cls, n: int) -> "UndirectedGraph":
        return cls(range(1, n + 1), combinations(range(1, n + 1), 2))

    @classmethod
    def cycle(cls, n: int) -> "UndirectedGraph":
        return cls(range(1, n + 1), [(i, i % n + 1) for i in range(1, n + 1)])

    @classmethod
    def path(cls, n: int) -> "UndirectedGraph":
        return cls(range(1, n + 1), [(i, i + 1) for i in range(1, n)])


def _guard(n: int, limit: int = MAX_VERTICES) -> None:
    if n > limit:
        raise ResourceLimitError("graph vertices", limit)


def independent_sets(graph: UndirectedGraph) -> list[tuple]:
    """All nonempty independent sets, by size and then vertex order."""
    _guard(len(graph.vertices))
    out = []
    for size in range(1, len(graph.vertices) + 1):
        layer = [c for c in combinations(graph.vertices, size) if graph.is_independent(c)]
        if not layer:
            break
        out.extend(layer)
    return out


def fractional_chromatic_number(graph: UndirectedGraph) -> tuple[Fraction, dict]:
    """Exact chi_f with an optimal fractional coloring ``{independent set: weight}``."""
    if not graph.vertices:
        return Fraction(0), {}
    sets = independent_sets(graph)
    lp = LinearProgram("min")
    for i in range(len(sets)):
        lp.add_variable(i)
    for v in graph.vertices:
        lp.add_constraint({i: 1 for i, s in enumerate(sets) if v in s}, "==", 1, ("cover", v))
    lp.set_objective({i: 1 for i in range(len(sets))})
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise AssertionError(f"coloring LP is {sol.status}")
    coloring = {frozenset(sets[i]): sol.primal[i] for i in range(len(sets)) if sol.primal[i]}
    return sol.value, coloring


def greedy_coloring_bound(graph: UndirectedGraph) -> int:
    """Colors used by first-fit in vertex order (an upper bound on chi, hence on chi_f)."""
    color: dict = {}
    for v in graph.vertices:
        taken = {color[u] for u in graph.neighbors(v) if u in color}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    return len(set(color.values()))


def cliques_of_size(graph: UndirectedGraph, size: int) -> list[tuple]:
    _guard(len(graph.vertices))
    if size < 0:
        raise ValidationError("clique size must be nonnegative")
    return [c for c in combinations(graph.vertices, size) if graph.is_clique(c)]


def max_clique(graph: UndirectedGraph) -> int:
    best = 0
    for size in range(1, len(graph.vertices) + 1):
        if cliques_of_size(graph, size):
            best = size
        else:
            break
    return best


def clique_interdiction_bruteforce(graph: UndirectedGraph, size: int, budget: int
                                   ) -> tuple[bool, tuple | None]:
    """Is there ``R`` with ``|R| <= budget`` meeting every clique of ``size`` vertices?

    Returns the answer and the first such ``R`` (smallest, then vertex order).
    """
    cliques = [set(c) for c in cliques_of_size(graph, size)]
    count = 0
    for r in range(0, min(budget, len(graph.vertices)) + 1):
        for R in combinations(graph.vertices, r):
            count += 1
            if count > MAX_SUBSETS:
                raise ResourceLimitError("vertex subsets", MAX_SUBSETS)
            chosen = set(R)
            if all(c & chosen for c in cliques):
                return True, R
    return False, None


def integral_unit_flow_families(graph: Digraph, source: Hashable, sink: Hashable, theta: int,
                                limit: int = MAX_SUBSETS) -> Iterator[tuple]:
    """Every set of ``theta`` pairwise arc-disjoint source-sink paths.

    Families are tuples of arc tuples in path enumeration order, produced
    in lexicographic order of path indices.  ``limit`` bounds the number
    of candidate combinations inspected.
    """
    if isinstance(theta, Fraction):
        if theta.denominator != 1:
            raise ValidationError("theta must be an integer")
        theta = int(theta)
    if theta < 0:
        raise ValidationError("theta must be nonnegative")
    paths = [p.arcs for p in enumerate_st_paths(graph, source, sink)]
    inspected = 0

    def rec(start: int, used: set, acc: list):
        nonlocal inspected
        inspected += 1
        if inspected > limit:
            raise ResourceLimitError("path families", limit)
        if len(acc) == theta:
            yield tuple(acc)
            return
        for i in range(start, len(paths)):
            p = paths[i]
            if used.isdisjoint(p):
                acc.append(p)
                yield from rec(i + 1, used | set(p), acc)
                acc.pop()

    yield from rec(0, set(), [])
