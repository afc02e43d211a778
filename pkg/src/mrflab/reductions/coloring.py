"""Fractional coloring as a clique-restricted robust flow with k = 2."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from ..errors import ResourceLimitError, ValidationError
from ..instances import CompatGraph, MrfRInstance, Path, PathFlow, id_key, witness_problems
from ..oracles import UndirectedGraph
from ..solvers.limits import Limits, resolve
from .artifact import FractionalColoring, GraphBuilder, ReductionArtifact, require_integer

KIND = "coloring->mrf_r"


def reduce_coloring_to_mrfr(graph: UndirectedGraph, colors) -> ReductionArtifact:
    """One bundle of ``colors`` parallel arcs per edge, chained in edge order.

    Two arcs of each bundle stand for the edge's endpoints; arcs standing
    for the same vertex are pairwise compatible.
    """
    ell = require_integer(colors, "number of colors")
    if ell < 2:
        raise ValidationError("need at least two colors")
    edges = graph.sorted_edges()
    if not edges:
        raise ValidationError("graph has no edges, so there is no network to build")
    b = GraphBuilder()
    chain = [b.node(f"z{i}", f"chain node z_{i}", exact=True) for i in range(1, len(edges) + 2)]
    designated: dict = {}
    bundles: list[list] = []
    for i, (v, w) in enumerate(edges, start=1):
        members = []
        for j in range(1, ell + 1):
            if j == 1:
                role = f"bundle A_{i} member {j}, stands for vertex {v!r} of edge {{{v!r}, {w!r}}}"
            elif j == 2:
                role = f"bundle A_{i} member {j}, stands for vertex {w!r} of edge {{{v!r}, {w!r}}}"
            else:
                role = f"bundle A_{i} member {j}, spare"
            members.append(b.arc(f"e{i}.{j}", chain[i - 1], chain[i], 1, role, exact=True))
        designated[(i, v)] = members[0]
        designated[(i, w)] = members[1]
        bundles.append(members)
    by_vertex: dict = {}
    for (i, v), a in sorted(designated.items(), key=lambda kv: kv[0][0]):
        by_vertex.setdefault(v, []).append(a)
    compat = set()
    for arcs in by_vertex.values():
        for x in range(len(arcs)):
            for y in range(x + 1, len(arcs)):
                compat.add(frozenset((arcs[x], arcs[y])))
    inst = MrfRInstance(b.digraph(), chain[0], chain[-1], 2, CompatGraph(frozenset(compat)), ell)
    params = {
        "colors": ell,
        "edges": tuple(edges),
        "designated": designated,
        "vertex_arcs": {v: tuple(a) for v, a in by_vertex.items()},
        "bundles": tuple(tuple(m) for m in bundles),
    }
    return ReductionArtifact(KIND, inst, graph, b.provenance, params)


def _check(artifact: ReductionArtifact) -> None:
    if artifact.kind != KIND:
        raise ValidationError(f"expected a {KIND} artifact, got {artifact.kind}")


def coloring_from_flow(artifact: ReductionArtifact, flow: PathFlow) -> FractionalColoring:
    """Group witness paths by the vertices whose arcs they all contain."""
    _check(artifact)
    inst = artifact.instance
    problems = witness_problems(inst, flow)
    if problems:
        raise ValidationError("flow is not a witness: " + "; ".join(problems))
    graph: UndirectedGraph = artifact.origin
    vertex_arcs = artifact.parameters["vertex_arcs"]
    weights: dict = {}
    for p, x in flow.items():
        on = set(p.arcs)
        chosen = frozenset(v for v, arcs in vertex_arcs.items() if on.issuperset(arcs))
        weights[chosen] = weights.get(chosen, Fraction(0)) + x
    weights.pop(frozenset(), None)
    # vertices without edges have no arcs; give each one unit of existing weight
    isolated = [v for v in graph.vertices if v not in vertex_arcs]
    for v in isolated:
        items = sorted(weights.items(), key=lambda kv: (len(kv[0]), sorted(map(id_key, kv[0]))))
        if not items:
            items = [(frozenset(), Fraction(inst.theta))]
        remaining = Fraction(1)
        weights = {}
        for s, w in items:
            take = min(w, remaining)
            if take:
                weights[s | {v}] = weights.get(s | {v}, Fraction(0)) + take
                remaining -= take
            if w > take:
                weights[s] = weights.get(s, Fraction(0)) + w - take
    coloring = FractionalColoring(weights)
    bad = coloring.problems(graph)
    if bad:
        raise ValidationError("extracted coloring is invalid: " + "; ".join(bad))
    return coloring


def flow_from_coloring(artifact: ReductionArtifact, coloring: FractionalColoring,
                       limits: Limits | None = None) -> PathFlow:
    """Route each color class through its vertices' arcs, spreading over spare arcs elsewhere."""
    _check(artifact)
    lim = resolve(limits)
    graph: UndirectedGraph = artifact.origin
    coloring = coloring if isinstance(coloring, FractionalColoring) else FractionalColoring(coloring)
    bad = coloring.problems(graph)
    if bad:
        raise ValidationError("invalid coloring: " + "; ".join(bad))
    ell = artifact.parameters["colors"]
    total = coloring.total()
    if total > ell:
        raise ValidationError(f"coloring weight {total} exceeds {ell}")
    classes = list(coloring.items())
    if total < ell:
        classes.append((frozenset(), ell - total))
    edges = artifact.parameters["edges"]
    designated = artifact.parameters["designated"]
    bundles = artifact.parameters["bundles"]
    entries = []
    count = 0
    for members, weight in classes:
        choices = []
        for i, (v, w) in enumerate(edges, start=1):
            if v in members:
                choices.append((designated[(i, v)],))
            elif w in members:
                choices.append((designated[(i, w)],))
            else:
                choices.append(bundles[i - 1][2:])
        n = 1
        for c in choices:
            n *= len(c)
        if n == 0:
            raise ValidationError(f"class {sorted(members, key=id_key)!r} misses an edge "
                                  "and no spare arc is left")
        count += n
        if count > lim.paths:
            raise ResourceLimitError("coloring paths", lim.paths)
        share = weight / n
        for arcs in product(*choices):
            entries.append((Path(arcs), share))
    flow = PathFlow(entries)
    problems = witness_problems(artifact.instance, flow)
    if problems:
        raise AssertionError("constructed flow is not a witness: " + "; ".join(problems))
    return flow

