"""Clique interdiction as an integral clique-restricted robust flow."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from ..errors import ValidationError
from ..instances import CompatGraph, MrfRInstance, Path, PathFlow, witness_problems
from ..oracles import UndirectedGraph, cliques_of_size
from .artifact import GraphBuilder, ReductionArtifact, require_integer

KIND = "clique_interdiction->integral_mrf_r"


def reduce_clique_interdiction(graph: UndirectedGraph, size, budget) -> ReductionArtifact:
    """Build the integral instance with budget ``size + 1`` and demand ``|V| + size``.

    A chain ``v_1 .. v_(n+1)`` offers every vertex two parallel routes, one
    through ``a^0_v`` and one through ``a^1_v``; side sources ``s^0`` and
    ``s^1`` feed the routes directly through bundles of ``budget`` and
    ``n - budget`` arcs.
    """
    ell = require_integer(size, "clique size")
    r = require_integer(budget, "interdiction budget")
    vertices = list(graph.vertices)
    n = len(vertices)
    if ell < 2:
        raise ValidationError("clique size must be at least 2")
    if not 1 <= r < n:
        raise ValidationError(f"budget must satisfy 1 <= r < |V| = {n}, got {r}")
    k = ell + 1
    b = GraphBuilder()
    s = b.node("s", "source s", exact=True)
    s0 = b.node("s0", "side source s^0", exact=True)
    s1 = b.node("s1", "side source s^1", exact=True)
    chain = [b.node(f"v{i}", f"chain node v_{i}" + (f" (vertex {vertices[i - 1]!r})" if i <= n else ""),
                    exact=True) for i in range(1, n + 2)]
    y = {}
    z = {}
    for i, v in enumerate(vertices, start=1):
        for bit in (0, 1):
            y[(bit, v)] = b.node(f"y{bit}_{i}", f"y^{bit} of vertex {v!r}", exact=True)
            z[(bit, v)] = b.node(f"z{bit}_{i}", f"z^{bit} of vertex {v!r}", exact=True)
    t0 = b.node("t0", "side sink t^0", exact=True)
    t1 = b.node("t1", "side sink t^1", exact=True)
    t = b.node("t", "sink t", exact=True)

    a_s = b.arc("a_s", s, chain[0], 1, "arc a_s = (s, v_1)", exact=True)
    a_t = b.arc("a_t", chain[-1], t, 1, "arc a_t = (v_(n+1), t)", exact=True)
    vertex_arc = {}
    into, out_of = {}, {}
    for i, v in enumerate(vertices, start=1):
        for bit in (0, 1):
            into[(bit, v)] = b.arc(f"in{bit}_{i}", chain[i - 1], y[(bit, v)], 1,
                                   f"arc (v_i, y^{bit}_i) of vertex {v!r}", exact=True)
            vertex_arc[(bit, v)] = b.arc(f"a{bit}_{i}", y[(bit, v)], z[(bit, v)], 1,
                                         f"arc a^{bit}_v of vertex {v!r}", exact=True)
            out_of[(bit, v)] = b.arc(f"out{bit}_{i}", z[(bit, v)], chain[i], 1,
                                     f"arc (z^{bit}_i, v_(i+1)) of vertex {v!r}", exact=True)
    widths = {0: r, 1: n - r}
    side_src = {0: s0, 1: s1}
    side_snk = {0: t0, 1: t1}
    src_bundle, snk_bundle, feed, drain = {}, {}, {}, {}
    for bit in (0, 1):
        src_bundle[bit] = tuple(
            b.arc(f"s{bit}#{j}", s, side_src[bit], 1, f"bundle A^{bit}_s member {j}", exact=True)
            for j in range(1, widths[bit] + 1))
        snk_bundle[bit] = tuple(
            b.arc(f"t{bit}#{j}", side_snk[bit], t, 1, f"bundle A^{bit}_t member {j}", exact=True)
            for j in range(1, widths[bit] + 1))
        for i, v in enumerate(vertices, start=1):
            feed[(bit, v)] = b.arc(f"f{bit}_{i}", side_src[bit], y[(bit, v)], 1,
                                   f"arc (s^{bit}, y^{bit}_i) of vertex {v!r}", exact=True)
            drain[(bit, v)] = b.arc(f"d{bit}_{i}", z[(bit, v)], side_snk[bit], 1,
                                    f"arc (z^{bit}_i, t^{bit}) of vertex {v!r}", exact=True)
    direct = tuple(b.arc(f"st#{j}", s, t, 1, f"bundle A_st member {j}", exact=True)
                   for j in range(1, k - 1))

    edges = set()
    for v, w in graph.sorted_edges():
        edges.add(frozenset((vertex_arc[(1, v)], vertex_arc[(1, w)])))
    for v in vertices:
        edges.add(frozenset((a_s, vertex_arc[(1, v)])))
    special = (a_s, a_t) + direct
    for e in combinations(special, 2):
        edges.add(frozenset(e))
    inst = MrfRInstance(b.digraph(), s, t, k, CompatGraph(frozenset(edges)), n + ell,
                        integral=True)
    params = {
        "size": ell, "budget": r, "k": k, "theta": n + ell, "vertices": tuple(vertices),
        "a_s": a_s, "a_t": a_t, "vertex_arc": vertex_arc, "into": into, "out_of": out_of,
        "feed": feed, "drain": drain, "source_bundle": src_bundle, "sink_bundle": snk_bundle,
        "direct": direct, "special": special,
    }
    return ReductionArtifact(KIND, inst, (graph, ell, r), b.provenance, params)


def _check(artifact: ReductionArtifact) -> None:
    if artifact.kind != KIND:
        raise ValidationError(f"expected a {KIND} artifact, got {artifact.kind}")


def interdiction_set_from_flow(artifact: ReductionArtifact, flow: PathFlow) -> frozenset:
    """Vertices whose ``a^1`` arc lies on the unit path through both ``a_s`` and ``a_t``."""
    _check(artifact)
    problems = witness_problems(artifact.instance, flow)
    if problems:
        raise ValidationError("flow is not an integral witness: " + "; ".join(problems))
    p = artifact.parameters
    graph, ell, r = artifact.origin
    spine = [path for path, v in flow.items()
             if v == 1 and p["a_s"] in path.arcs and p["a_t"] in path.arcs]
    if not spine:
        raise ValidationError("no unit path of the flow uses both a_s and a_t")
    on = set(spine[0].arcs)
    chosen = frozenset(v for v in p["vertices"] if p["vertex_arc"][(1, v)] in on)
    bad = interdiction_problems(graph, ell, r, chosen)
    if bad:
        raise ValidationError("extracted vertex set fails: " + "; ".join(bad))
    return chosen


def interdiction_problems(graph: UndirectedGraph, size: int, budget: int, chosen) -> list[str]:
    """Why ``chosen`` does not hit every clique of the given size within the budget."""
    out = []
    chosen = frozenset(chosen)
    if not chosen <= set(graph.vertices):
        out.append("set contains unknown vertices")
    if len(chosen) > budget:
        out.append(f"set has {len(chosen)} > {budget} vertices")
    for clique in cliques_of_size(graph, size):
        if chosen.isdisjoint(clique):
            out.append(f"clique {clique!r} is not hit")
            break
    return out


def flow_from_interdiction_set(artifact: ReductionArtifact, chosen) -> PathFlow:
    """Integral witness from a vertex set that hits every clique.

    The set is padded with the first unused vertices until it has exactly
    ``budget`` members.
    """
    _check(artifact)
    p = artifact.parameters
    graph, ell, r = artifact.origin
    chosen = frozenset(chosen)
    bad = interdiction_problems(graph, ell, r, chosen)
    if bad:
        raise ValidationError("vertex set is not an interdiction set: " + "; ".join(bad))
    vertices = p["vertices"]
    padded = set(chosen)
    for v in vertices:
        if len(padded) >= r:
            break
        padded.add(v)
    entries = []
    spine = [p["a_s"]]
    for v in vertices:
        bit = 1 if v in padded else 0
        spine.extend((p["into"][(bit, v)], p["vertex_arc"][(bit, v)], p["out_of"][(bit, v)]))
    spine.append(p["a_t"])
    entries.append((Path(tuple(spine)), Fraction(1)))
    for bit, members in ((0, [v for v in vertices if v in padded]),
                         (1, [v for v in vertices if v not in padded])):
        for j, v in enumerate(members):
            arcs = (p["source_bundle"][bit][j], p["feed"][(bit, v)], p["vertex_arc"][(bit, v)],
                    p["drain"][(bit, v)], p["sink_bundle"][bit][j])
            entries.append((Path(arcs), Fraction(1)))
    for a in p["direct"]:
        entries.append((Path((a,)), Fraction(1)))
    flow = PathFlow(entries)
    problems = witness_problems(artifact.instance, flow)
    if problems:
        raise AssertionError("constructed flow is not a witness: " + "; ".join(problems))
    return flow
