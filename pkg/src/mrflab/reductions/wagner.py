"""Combining clique and flow instances, and unions that decide parity.

The flow side must first be brought into shape: every arc in at most one
compatibility edge (:func:`matchingize_compat`) and a demand equal to the
maximum flow value (:func:`saturate_demand`).  :func:`combine_clique_flow`
then yields an instance that is NO exactly when the clique instance is YES
and the flow instance is NO, and :func:`wagner_union` glues several such
instances at their terminals so the union is YES exactly when all parts are.
"""

from __future__ import annotations

from ..errors import ValidationError
from ..instances import CompatGraph, MrfRInstance, id_key
from ..oracles import UndirectedGraph, max_clique
from ..solvers.maxflow import max_flow
from .artifact import GraphBuilder, ReductionArtifact, require_integer

MATCHING = "mrf_r->matching_compat"
SATURATE = "mrf_r->saturated"
PAD = "mrf_r->padded_budget"
COMBINE = "clique+flow->mrf_r"
UNION = "mrf_r_union"


def _copy_nodes(b: GraphBuilder, instance: MrfRInstance, role: str = "node kept from the input"):
    for v in instance.graph.nodes:
        b.node(v, role, exact=True)


def matchingize_compat(instance: MrfRInstance) -> ReductionArtifact:
    """Subdivide every arc with several compatibility edges into one segment per edge.

    The ``j``-th incident edge (in sorted edge order) moves to segment ``j``
    of each of its arcs.  Segments of arc ``a`` are named ``a/1``, ``a/2``, ...
    """
    compat = instance.compat
    edges = compat.sorted_edges()
    incident: dict = {}
    for e in edges:
        for a in e:
            incident.setdefault(a, []).append(e)
    split = {a for a, es in incident.items() if len(es) > 1}
    b = GraphBuilder(reserved=set(instance.graph.nodes))
    _copy_nodes(b, instance)
    segments: dict = {}
    taken = set(instance.graph.arc_ids)
    for arc in instance.graph.arcs:
        if arc.id not in split:
            b.arc(arc.id, arc.tail, arc.head, 1, "arc kept from the input", exact=True)
            segments[arc.id] = (arc.id,)
            continue
        d = len(incident[arc.id])
        inner = [b.node(f"{arc.id}/node{j}", f"subdivision node {j} of arc {arc.id!r}")
                 for j in range(1, d)]
        ends = [arc.tail] + inner + [arc.head]
        segs = []
        for j in range(1, d + 1):
            name = f"{arc.id}/{j}"
            while name in taken:
                name += "'"
            taken.add(name)
            segs.append(b.arc(name, ends[j - 1], ends[j], 1,
                              f"subdivision segment {j} of arc {arc.id!r}", exact=True))
        segments[arc.id] = tuple(segs)
    new_edges = set()
    for e in edges:
        pair = []
        for a in e:
            if a in split:
                pair.append(segments[a][incident[a].index(e)])
            else:
                pair.append(a)
        new_edges.add(frozenset(pair))
    out = MrfRInstance(b.digraph(), instance.source, instance.sink, instance.k,
                       CompatGraph(frozenset(new_edges)), instance.theta, instance.integral)
    return ReductionArtifact(MATCHING, out, instance, b.provenance, {"segments": segments})


def saturate_demand(instance: MrfRInstance) -> ReductionArtifact:
    """Put a bundle of ``theta`` singleton arcs in front of the source.

    Afterwards the maximum flow value is exactly ``theta`` whenever the
    input could carry ``theta`` at all.
    """
    theta = require_integer(instance.theta, "demand")
    b = GraphBuilder(reserved=set(instance.graph.nodes))
    new_source = b.node(f"{instance.source}*", "new source in front of the old one")
    _copy_nodes(b, instance)
    bundle = []
    taken = set(instance.graph.arc_ids)
    for j in range(1, theta + 1):
        name = f"{instance.source}*#{j}"
        while name in taken:
            name += "'"
        taken.add(name)
        bundle.append(b.arc(name, new_source, instance.source, 1,
                            f"source bundle member {j} (compatible with nothing)", exact=True))
    for arc in instance.graph.arcs:
        b.arc(arc.id, arc.tail, arc.head, 1, "arc kept from the input", exact=True)
    out = MrfRInstance(b.digraph(), new_source, instance.sink, instance.k, instance.compat,
                       instance.theta, instance.integral)
    return ReductionArtifact(SATURATE, out, instance, b.provenance,
                             {"bundle": tuple(bundle), "old_source": instance.source})


def pad_budget(instance: MrfRInstance, k_target: int) -> ReductionArtifact:
    """Raise the budget to ``k_target`` with extra source-sink arcs compatible with everything.

    Each extra arc also raises the demand by one.
    """
    if not isinstance(k_target, int) or k_target < instance.k:
        raise ValidationError(f"target budget must be an integer >= {instance.k}")
    extra = k_target - instance.k
    b = GraphBuilder(reserved=set(instance.graph.nodes))
    _copy_nodes(b, instance)
    for arc in instance.graph.arcs:
        b.arc(arc.id, arc.tail, arc.head, 1, "arc kept from the input", exact=True)
    taken = set(instance.graph.arc_ids)
    pads = []
    for j in range(1, extra + 1):
        name = f"pad#{j}"
        while name in taken:
            name += "'"
        taken.add(name)
        pads.append(b.arc(name, instance.source, instance.sink, 1,
                          f"padding arc {j}, compatible with every arc", exact=True))
    everything = list(instance.graph.arc_ids) + pads
    edges = set(instance.compat.edges)
    for p in pads:
        for a in everything:
            if a != p:
                edges.add(frozenset((p, a)))
    out = MrfRInstance(b.digraph(), instance.source, instance.sink, k_target,
                       CompatGraph(frozenset(edges)), instance.theta + extra, instance.integral)
    return ReductionArtifact(PAD, out, instance, b.provenance, {"pads": tuple(pads)})


def _is_matching(compat: CompatGraph) -> bool:
    seen = set()
    for e in compat.edges:
        if seen & e:
            return False
        seen |= e
    return True


def combine_clique_flow(clique_inst, flow_inst: MrfRInstance) -> ReductionArtifact:
    """Instance that is YES iff the clique instance is NO or the flow instance is YES.

    ``clique_inst`` is a pair ``(G, n)`` asking for a clique of ``n``
    vertices, where ``G`` has no larger clique.  One source-sink arc per
    vertex of ``G`` is added; these arcs copy ``G``'s edges among
    themselves and are compatible with every arc of the flow instance.
    """
    graph, n = clique_inst
    n = require_integer(n, "clique size")
    if not isinstance(graph, UndirectedGraph):
        raise ValidationError("clique instance needs an UndirectedGraph")
    if n < 1:
        raise ValidationError("clique size must be positive")
    if max_clique(graph) > n:
        raise ValidationError(f"graph has a clique larger than {n}")
    if flow_inst.k != 2:
        raise ValidationError("flow instance must have budget 2")
    if not _is_matching(flow_inst.compat):
        raise ValidationError("flow instance compatibility graph is not a matching")
    theta = require_integer(flow_inst.theta, "flow demand")
    if max_flow(flow_inst.graph, flow_inst.source, flow_inst.sink) != theta:
        raise ValidationError("flow instance minimum cut differs from its demand")
    b = GraphBuilder(reserved=set(flow_inst.graph.nodes))
    _copy_nodes(b, flow_inst, "node of the flow instance")
    for arc in flow_inst.graph.arcs:
        b.arc(arc.id, arc.tail, arc.head, 1, "arc of the flow instance", exact=True)
    taken = set(flow_inst.graph.arc_ids)
    vertex_arc = {}
    for v in graph.vertices:
        name = f"v[{v}]"
        while name in taken:
            name += "'"
        taken.add(name)
        vertex_arc[v] = b.arc(name, flow_inst.source, flow_inst.sink, 1,
                              f"arc a_v of clique vertex {v!r}", exact=True)
    edges = set(flow_inst.compat.edges)
    for v, w in graph.sorted_edges():
        edges.add(frozenset((vertex_arc[v], vertex_arc[w])))
    for a in vertex_arc.values():
        for other in flow_inst.graph.arc_ids:
            edges.add(frozenset((a, other)))
    out = MrfRInstance(b.digraph(), flow_inst.source, flow_inst.sink, n + 2,
                       CompatGraph(frozenset(edges)), theta + len(graph.vertices))
    return ReductionArtifact(COMBINE, out, (clique_inst, flow_inst), b.provenance,
                             {"vertex_arc": vertex_arc, "clique_size": n})


def wagner_union(instances, k: int | None = None) -> ReductionArtifact:
    """Glue instances at their sources and sinks; YES iff every part is YES.

    Parts must share the budget ``k`` and have demand equal to their
    maximum flow value.  Part ``r`` (from 1) keeps its elements under the
    prefix ``r:``; the shared terminals are ``s`` and ``t``.
    """
    instances = list(instances)
    if not instances:
        raise ValidationError("nothing to unite")
    budget = instances[0].k if k is None else k
    for r, inst in enumerate(instances, start=1):
        if inst.k != budget:
            raise ValidationError(f"part {r} has budget {inst.k}, expected {budget}")
        if max_flow(inst.graph, inst.source, inst.sink) != inst.theta:
            raise ValidationError(f"part {r}: demand differs from the maximum flow value")
    b = GraphBuilder()
    s = b.node("s", "shared source", exact=True)
    t = b.node("t", "shared sink", exact=True)
    node_map: dict = {}
    arc_map: dict = {}
    edges = set()
    for r, inst in enumerate(instances, start=1):
        rename = {inst.source: s, inst.sink: t}
        for v in inst.graph.nodes:
            if v not in rename:
                rename[v] = b.node(f"{r}:{v}", f"node {v!r} of part {r}", exact=True)
        node_map[r] = rename
        amap = {}
        for arc in sorted(inst.graph.arcs, key=lambda a: id_key(a.id)):
            amap[arc.id] = b.arc(f"{r}:{arc.id}", rename[arc.tail], rename[arc.head], 1,
                                 f"arc {arc.id!r} of part {r}", exact=True)
        arc_map[r] = amap
        for e in inst.compat.edges:
            edges.add(frozenset(amap[a] for a in e))
    theta = sum((inst.theta for inst in instances), 0)
    out = MrfRInstance(b.digraph(), s, t, budget, CompatGraph(frozenset(edges)), theta,
                       any(inst.integral for inst in instances))
    return ReductionArtifact(UNION, out, tuple(instances), b.provenance,
                             {"node_map": node_map, "arc_map": arc_map, "parts": len(instances)})


def parity_union(pairs) -> ReductionArtifact:
    """Union over ``(clique instance, flow instance)`` pairs, NO iff some pair is (YES, NO).

    Each flow instance is given a matching compatibility graph and a
    saturated demand and combined with its clique instance; the results
    are padded to the largest budget before the union.
    """
    combined = []
    for clique_inst, flow_inst in pairs:
        shaped = saturate_demand(matchingize_compat(flow_inst).instance).instance
        combined.append(combine_clique_flow(clique_inst, shaped).instance)
    k = max(inst.k for inst in combined)
    padded = [pad_budget(inst, k).instance for inst in combined]
    return wagner_union(padded, k)
