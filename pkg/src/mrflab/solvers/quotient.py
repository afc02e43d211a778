"""Parallel-arc bundles and the search for damaging failure patterns.

Arcs with the same endpoints, capacity and immunity are interchangeable in
an MRF instance, so the path LP may be written over bundle-level paths: a
symmetric optimum spreads each bundle path's flow evenly over its arc
realisations.  A failure pattern then is a count vector ``j`` (``j_B``
failed arcs in bundle ``B``), and a bundle path ``p`` loses the fraction
``1 - prod_{B in p} (1 - j_B / b_B)`` of its flow.  With every bundle of
size one this is the ordinary path formulation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Sequence

from ..errors import ResourceLimitError
from ..instances import Arc, Digraph, Path, enumerate_st_paths, id_key

Pattern = tuple  # ((bundle index, failures), ...) sorted by bundle index


@dataclass(frozen=True)
class Bundle:
    id: object
    tail: object
    head: object
    capacity: Fraction
    immune: bool
    members: tuple

    @property
    def size(self) -> int:
        return len(self.members)


class BundleGraph:
    def __init__(self, graph: Digraph, merge: bool = True):
        groups: dict = {}
        for a in sorted(graph.arcs, key=lambda a: id_key(a.id)):
            key = (a.tail, a.head, a.capacity, a.immune) if merge else (a.id,)
            groups.setdefault(key, []).append(a)
        bundles = []
        for arcs in groups.values():
            first = arcs[0]
            bundles.append(Bundle(first.id, first.tail, first.head, first.capacity,
                                  first.immune, tuple(a.id for a in arcs)))
        bundles.sort(key=lambda b: id_key(b.id))
        self.graph = graph
        self.bundles = bundles
        self.index = {b.id: i for i, b in enumerate(bundles)}
        self.collapsed = Digraph(graph.nodes, [Arc(b.id, b.tail, b.head, b.capacity, b.immune)
                                               for b in bundles])

    def paths(self, source, sink, limit: int | None) -> list[tuple]:
        return [tuple(self.index[a] for a in p.arcs)
                for p in enumerate_st_paths(self.collapsed, source, sink, limit)]

    def interdictable(self) -> list[bool]:
        return [not b.immune for b in self.bundles]

    def sizes(self) -> list[int]:
        return [b.size for b in self.bundles]

    def realisations(self, bpath: Sequence[int]) -> int:
        n = 1
        for i in bpath:
            n *= self.bundles[i].size
        return n

    def expand(self, bpath: Sequence[int], value: Fraction, commodity=None):
        share = value / self.realisations(bpath)
        for combo in product(*(self.bundles[i].members for i in bpath)):
            yield Path(combo, commodity), share

    def pattern_arcs(self, pattern: Pattern) -> frozenset:
        out = []
        for i, j in pattern:
            out.extend(self.bundles[i].members[:j])
        return frozenset(out)

    def lost_fraction(self, bpath: Sequence[int], pattern: Pattern) -> Fraction:
        on = set(bpath)
        keep = Fraction(1)
        for i, j in pattern:
            if i in on:
                keep *= 1 - Fraction(j, self.bundles[i].size)
        return 1 - keep


class PatternSearch:
    """Find failure patterns whose loss exceeds a threshold, best first.

    ``sizes[i]`` is the number of arcs in item ``i``; patterns use at most
    ``k`` failures in total over interdictable items.  ``adjacent`` (only
    meaningful when every item is a single arc) restricts patterns to
    cliques of a compatibility graph.
    """

    def __init__(self, sizes: Sequence[int], interdictable: Sequence[bool], k: int,
                 adjacent: Callable[[int, int], bool] | None = None,
                 node_limit: int | None = None):
        self.sizes = list(sizes)
        self.interdictable = list(interdictable)
        self.k = k
        self.adjacent = adjacent
        self.node_limit = node_limit

    def _coflow(self, flows):
        F: dict = {}
        k = self.k
        for items, x in flows:
            its = sorted(i for i in set(items) if self.interdictable[i])
            for size in range(1, min(k, len(its)) + 1):
                for t in combinations(its, size):
                    F[t] = F.get(t, 0) + x
        return F

    def top(self, flows: Sequence[tuple[Sequence[int], Fraction]], threshold: Fraction,
            count: int = 1) -> list[tuple[Fraction, Pattern]]:
        """Up to ``count`` maximal patterns with loss > ``threshold``, largest loss first."""
        F = self._coflow(flows)
        cand = sorted(t[0] for t in F if len(t) == 1)
        sizes = self.sizes
        k = self.k
        per_fail = {i: F[(i,)] / sizes[i] for i in cand}
        # suffix[p]: the largest per-failure gains available from cand[p:], with multiplicity
        suffix: list[list] = [[] for _ in range(len(cand) + 1)]
        for p in range(len(cand) - 1, -1, -1):
            i = cand[p]
            suffix[p] = sorted(suffix[p + 1] + [per_fail[i]] * min(sizes[i], k), reverse=True)[:k]
        heap: list = []  # (loss, -order, pattern) min-heap of kept results
        order = [0]
        nodes = [0]
        chosen: list = []  # (item, q)

        def admissible(ub):
            if ub <= threshold:
                return False
            return len(heap) < count or ub > heap[0][0]

        def record(value):
            pat = tuple((i, j) for i, _q, j in chosen)
            order[0] += 1
            entry = (value, -order[0], pat)
            if len(heap) < count:
                heapq.heappush(heap, entry)
            elif value > heap[0][0]:
                heapq.heapreplace(heap, entry)

        def gain(i, q):
            prev = [(c, qc) for c, qc, _ in chosen]
            total = Fraction(0)
            for size in range(len(prev) + 1):
                sign = -1 if size % 2 else 1
                for sub in combinations(prev, size):
                    key = tuple(sorted([c for c, _ in sub] + [i]))
                    f = F.get(key)
                    if f:
                        w = Fraction(sign)
                        for _c, qc in sub:
                            w *= qc
                        total += w * f
            return q * total

        def rec(pos, rem, current):
            nodes[0] += 1
            if self.node_limit is not None and nodes[0] > self.node_limit:
                raise ResourceLimitError("scenario search nodes", self.node_limit)
            if rem == 0:
                if current > threshold:
                    record(current)
                return
            extended = False
            for p in range(pos, len(cand)):
                ub = current + sum(suffix[p][:rem])
                if not admissible(ub):
                    extended = True
                    break
                i = cand[p]
                if self.adjacent is not None and any(not self.adjacent(i, c) for c, _q, _j in chosen):
                    continue
                extended = True
                for j in range(min(sizes[i], rem), 0, -1):
                    q = Fraction(j, sizes[i])
                    g = gain(i, q)
                    chosen.append((i, q, j))
                    rec(p + 1, rem - j, current + g)
                    chosen.pop()
            if not extended and chosen and current > threshold:
                record(current)

        rec(0, k, Fraction(0))
        out = sorted(heap, key=lambda e: (-e[0], -e[1]))
        return [(v, pat) for v, _o, pat in out]


def pattern_key(pattern: Pattern):
    return tuple(pattern)
