"""Exact maximum flow and minimum cut by shortest augmenting paths."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from ..instances import Digraph, id_key


def _residual_run(graph: Digraph, source, sink):
    flow = {a.id: Fraction(0) for a in graph.arcs}
    total = Fraction(0)
    while True:
        prev: dict = {source: None}
        queue = deque([source])
        while queue and sink not in prev:
            v = queue.popleft()
            for a in graph.out_arcs(v):
                if a.head not in prev and flow[a.id] < a.capacity:
                    prev[a.head] = (a, 1)
                    queue.append(a.head)
            for a in graph.in_arcs(v):
                if a.tail not in prev and flow[a.id] > 0:
                    prev[a.tail] = (a, -1)
                    queue.append(a.tail)
        if sink not in prev:
            return total, flow, set(prev)
        steps = []
        v = sink
        while v != source:
            a, d = prev[v]
            steps.append((a, d))
            v = a.tail if d == 1 else a.head
        delta = min((a.capacity - flow[a.id]) if d == 1 else flow[a.id] for a, d in steps)
        for a, d in steps:
            flow[a.id] += delta * d
        total += delta


def max_flow(graph: Digraph, source, sink) -> Fraction:
    return _residual_run(graph, source, sink)[0]


def max_flow_arcs(graph: Digraph, source, sink) -> tuple[Fraction, dict]:
    value, flow, _ = _residual_run(graph, source, sink)
    return value, {a: v for a, v in flow.items() if v}


def min_cut(graph: Digraph, source, sink) -> frozenset:
    """Arcs leaving the set of nodes reachable from ``source`` in the final residual graph."""
    _, _, reach = _residual_run(graph, source, sink)
    return frozenset(sorted((a.id for a in graph.arcs if a.tail in reach and a.head not in reach),
                            key=id_key))
