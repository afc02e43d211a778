"""Integral variants, decided by exhaustive search with pruning."""

from __future__ import annotations

from collections import deque
from fractions import Fraction

from ..errors import ResourceLimitError, ValidationError
from ..instances import (AT_MOST_K, EXACTLY_K, Arc, Digraph, MrfInstance, MrfRInstance, Path,
                         PathFlow, enumerate_st_paths, id_key, iter_scenarios, worst_case_loss)
from .limits import Limits, resolve
from .maxflow import max_flow
from .robust import Decision, MrfSolution, _check_budget


def _twin_classes(instance: MrfRInstance) -> list[list]:
    """Parallel arcs that the compatibility graph cannot tell apart, in id order."""
    compat = instance.compat
    classes: list[list] = []
    for a in sorted(instance.graph.arcs, key=lambda a: id_key(a.id)):
        for cls in classes:
            rep = instance.graph.arc(cls[0])
            if (rep.tail, rep.head) != (a.tail, a.head):
                continue
            if all(compat.neighbors(b) - {a.id} == compat.neighbors(a.id) - {b} for b in cls):
                cls.append(a.id)
                break
        else:
            classes.append([a.id])
    return classes


def _unit_paths(graph: Digraph, free: set, source, sink, enough: int) -> int:
    """Number of arc-disjoint source-sink paths over ``free`` arcs, counted up to ``enough``."""
    flow: set = set()
    found = 0
    while found < enough:
        prev = {source: None}
        queue = deque([source])
        while queue and sink not in prev:
            v = queue.popleft()
            for a in graph.out_arcs(v):
                if a.id in free and a.id not in flow and a.head not in prev:
                    prev[a.head] = (a, 1)
                    queue.append(a.head)
            for a in graph.in_arcs(v):
                if a.id in flow and a.tail not in prev:
                    prev[a.tail] = (a, -1)
                    queue.append(a.tail)
        if sink not in prev:
            break
        v = sink
        while v != source:
            a, d = prev[v]
            if d == 1:
                flow.add(a.id)
                v = a.tail
            else:
                flow.discard(a.id)
                v = a.head
        found += 1
    return found


def decide_integral_mrf_r_star(instance: MrfRInstance, limits: Limits | None = None) -> Decision:
    """Search families of theta arc-disjoint paths whose clique losses all stay below k.

    Interchangeable parallel arcs are handled as one bundle: a family is a
    multiset of bundle paths, realised by handing out bundle members in
    order.  Partial families are discarded as soon as some clique failure
    already hits k of their paths, or the unused arcs cannot carry the
    paths still missing.
    """
    lim = resolve(limits)
    theta = instance.theta
    if theta.denominator != 1:
        raise ValidationError("integral demand must be an integer", "theta")
    need = int(theta)
    target = instance.k - 1
    info = {"threshold": Fraction(target)}
    if need == 0:
        return Decision(True, PathFlow(), Fraction(0), info)
    graph = instance.graph
    classes = _twin_classes(instance)
    members = {cls[0]: cls for cls in classes}
    collapsed = Digraph(graph.nodes, [Arc(cls[0], graph.arc(cls[0]).tail, graph.arc(cls[0]).head)
                                      for cls in classes])
    bpaths = [p.arcs for p in enumerate_st_paths(collapsed, instance.source, instance.sink, lim.paths)]
    if not bpaths:
        return Decision(False, None, None, {**info, "reason": "no path"})

    scen_of: dict = {}
    count = 0
    for s in iter_scenarios(graph.arc_ids, instance.k, AT_MOST_K, instance.compat):
        if not s:
            continue
        for a in s:
            scen_of.setdefault(a, []).append(count)
        count += 1
        if count > lim.scenarios:
            raise ResourceLimitError("scenarios", lim.scenarios)
    hits = [0] * count
    used = {b: 0 for b in members}
    free = {a.id for a in graph.arcs}
    chosen: list[tuple] = []
    nodes = [0]

    def residual_ok(missing: int) -> bool:
        return _unit_paths(graph, free, instance.source, instance.sink, missing) >= missing

    def rec(start: int) -> bool:
        nodes[0] += 1
        if nodes[0] > lim.search:
            raise ResourceLimitError("integral flow search nodes", lim.search)
        if len(chosen) == need:
            return True
        if not residual_ok(need - len(chosen)):
            return False
        for idx in range(start, len(bpaths)):
            bp = bpaths[idx]
            if any(used[b] >= len(members[b]) for b in bp):
                continue
            arcs = tuple(members[b][used[b]] for b in bp)
            touched = set()
            for a in arcs:
                touched.update(scen_of.get(a, ()))
            if any(hits[t] + 1 > target for t in touched):
                continue
            for t in touched:
                hits[t] += 1
            for b in bp:
                used[b] += 1
            free.difference_update(arcs)
            chosen.append(arcs)
            if rec(idx):
                return True
            chosen.pop()
            free.update(arcs)
            for b in bp:
                used[b] -= 1
            for t in touched:
                hits[t] -= 1
        return False

    if not rec(0):
        return Decision(False, None, None, {**info, "nodes": nodes[0]})
    flow = PathFlow((Path(arcs), Fraction(1)) for arcs in chosen)
    worst, _ = worst_case_loss(flow, graph, instance.k, AT_MOST_K, instance.compat)
    if worst > target:
        raise AssertionError("integral witness violates a clique bound")
    return Decision(True, flow, worst, {**info, "nodes": nodes[0]})


def solve_integral_mrf(instance: MrfInstance, limits: Limits | None = None) -> MrfSolution:
    """Best integral path flow for value minus worst loss over ``|S| = k``, by branch and bound."""
    lim = resolve(limits)
    graph = instance.graph
    k = instance.k
    _check_budget(graph, k)
    for a in graph.arcs:
        if a.capacity.denominator != 1:
            raise ValidationError("integral flows need integer capacities", f"arc {a.id!r}")
    paths = enumerate_st_paths(graph, instance.source, instance.sink, lim.paths)
    residual = {a.id: int(a.capacity) for a in graph.arcs}
    amounts = [0] * len(paths)
    best_value = Fraction(0)
    best_amounts = list(amounts)
    nodes = [0]

    def current_flow() -> PathFlow:
        return PathFlow((p, Fraction(v)) for p, v in zip(paths, amounts) if v)

    def extra_bound(start: int) -> int:
        """Further value any completion can add: max flow over arcs of the remaining paths."""
        arcs = {a for p in paths[start:] for a in p.arcs if residual[a] > 0}
        if not arcs:
            return 0
        sub = Digraph(graph.nodes, [Arc(a, graph.arc(a).tail, graph.arc(a).head, residual[a])
                                    for a in sorted(arcs, key=id_key)])
        return int(max_flow(sub, instance.source, instance.sink))

    def rec(idx: int, value: int) -> None:
        nonlocal best_value, best_amounts
        nodes[0] += 1
        if nodes[0] > lim.search:
            raise ResourceLimitError("integral flow search nodes", lim.search)
        flow = current_flow()
        lost, _ = worst_case_loss(flow, graph, k, EXACTLY_K)
        if value - lost > best_value:
            best_value, best_amounts = value - lost, list(amounts)
        if idx == len(paths):
            return
        if value + extra_bound(idx) - lost <= best_value:
            return
        p = paths[idx]
        top = min(residual[a] for a in p.arcs)
        for amount in range(top, -1, -1):
            amounts[idx] = amount
            for a in p.arcs:
                residual[a] -= amount
            rec(idx + 1, value + amount)
            for a in p.arcs:
                residual[a] += amount
        amounts[idx] = 0

    rec(0, 0)
    amounts[:] = best_amounts
    flow = current_flow()
    worst, scen = worst_case_loss(flow, graph, k, EXACTLY_K)
    return MrfSolution(flow.value() - worst, flow, worst, scen)
