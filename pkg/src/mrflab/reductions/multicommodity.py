"""Clique-restricted robust flow to the multicommodity decision problem.

Every arc of the input is subdivided into an in-arc, a high-capacity middle
arc and an out-arc.  One commodity per ordered incompatible arc pair routes
two units through every middle arc, so interdicting two incompatible
middle arcs together costs the adversary; a large commodity ``i0`` carries
the original flow plus filler through each middle arc.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from ..errors import ResourceLimitError, ValidationError
from ..instances import (Commodity, CompatGraph, MrfMInstance, MrfRInstance, Path, PathFlow,
                         flow_violations, id_key, topological_arc_order, witness_problems)
from .artifact import ARC, COMMODITY, NODE, GraphBuilder, ReductionArtifact, require_integer

NORMALIZE = "mrf_r->normalized"
KIND = "mrf_r->mrf_m"
I0 = "i0"
UNCROSS_LIMIT = 100_000


# -- normalization -----------------------------------------------------------

def _clique_arcs(instance: MrfRInstance) -> tuple | None:
    """``k - 1`` pairwise compatible source-sink arcs, if the source has exactly theta out-arcs."""
    g = instance.graph
    if len(g.out_arcs(instance.source)) != instance.theta:
        return None
    direct = [a.id for a in g.out_arcs(instance.source) if a.head == instance.sink]
    need = instance.k - 1
    for combo in combinations(direct, need):
        if instance.compat.is_clique(combo):
            return tuple(combo)
    return None


def normalize_mrfr(instance: MrfRInstance) -> ReductionArtifact:
    """Give the source exactly theta out-arcs and add ``k - 1`` compatible source-sink arcs.

    The old source keeps its arcs and is fed by a bundle of theta arcs
    that are compatible with nothing; the new parallel arcs form a clique
    and raise the demand by ``k - 1``.  Inputs that already have this
    shape are returned unchanged.
    """
    theta = require_integer(instance.theta, "demand")
    if theta < 1:
        raise ValidationError("demand must be positive to normalize")
    g = instance.graph
    present = _clique_arcs(instance)
    if present is not None:
        prov = {(NODE, v): "original node" for v in g.nodes}
        prov.update({(ARC, a.id): "original arc" for a in g.arcs})
        for a in present:
            prov[(ARC, a)] = "clique arc (already present)"
        return ReductionArtifact(NORMALIZE, instance, instance, prov,
                                 {"clique_arcs": present, "bundle": (), "identity": True,
                                  "old_source": instance.source})
    b = GraphBuilder()
    for v in g.nodes:
        b.node(v, "original node" if v != instance.source else "original source, now fed by the bundle",
               exact=True)
    for a in g.arcs:
        b.arc(a.id, a.tail, a.head, 1, "original arc", exact=True)
    source = b.node(f"{instance.source}*", "new source")
    bundle = tuple(b.arc(f"feed{j}", source, instance.source, 1, f"source bundle member {j}")
                   for j in range(1, theta + 1))
    clique = tuple(b.arc(f"clique{j}", source, instance.sink, 1, f"clique arc a_{j}")
                   for j in range(1, instance.k))
    edges = set(instance.compat.edges)
    edges.update(frozenset(p) for p in combinations(clique, 2))
    out = MrfRInstance(b.digraph(), source, instance.sink, instance.k, CompatGraph(frozenset(edges)),
                       theta + instance.k - 1, instance.integral)
    return ReductionArtifact(NORMALIZE, out, instance, b.provenance,
                             {"clique_arcs": clique, "bundle": bundle, "identity": False,
                              "old_source": instance.source})


def normalized_flow(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Witness for the normalized instance: prefix each path with bundle arcs, one unit per arc."""
    if artifact.kind != NORMALIZE:
        raise ValidationError(f"expected a {NORMALIZE} artifact")
    if artifact.parameters["identity"]:
        return flow
    entries = []
    bundle = list(artifact.parameters["bundle"])
    slot, room = 0, Fraction(1)
    for p, v in flow.items():
        while v > 0:
            if slot >= len(bundle):
                raise ValidationError("flow value exceeds the demand")
            take = min(v, room)
            entries.append((Path((bundle[slot],) + p.arcs), take))
            v -= take
            room -= take
            if room == 0:
                slot, room = slot + 1, Fraction(1)
    entries.extend((Path((a,)), 1) for a in artifact.parameters["clique_arcs"])
    return PathFlow(entries)


def denormalized_flow(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Drop the clique-arc paths and the bundle prefix."""
    if artifact.kind != NORMALIZE:
        raise ValidationError(f"expected a {NORMALIZE} artifact")
    if artifact.parameters["identity"]:
        return flow
    clique = set(artifact.parameters["clique_arcs"])
    bundle = set(artifact.parameters["bundle"])
    entries = []
    for p, v in flow.items():
        if p.arcs and p.arcs[0] in clique:
            continue
        if not p.arcs or p.arcs[0] not in bundle:
            raise ValidationError(f"path {p.arcs!r} does not start in the source bundle")
        entries.append((Path(p.arcs[1:]), v))
    return PathFlow(entries)


# -- the multicommodity instance ----------------------------------------------

def reduce_mrfr_to_mrfm(source) -> ReductionArtifact:
    """Build the multicommodity instance from a normalized instance (or its artifact)."""
    if isinstance(source, ReductionArtifact):
        if source.kind != NORMALIZE:
            raise ValidationError(f"expected a {NORMALIZE} artifact, got {source.kind}")
        inst: MrfRInstance = source.instance
        clique = tuple(source.parameters["clique_arcs"])
    else:
        inst = source
        clique = _clique_arcs(inst)
        if clique is None:
            raise ValidationError("instance is not normalized: the source needs exactly theta "
                                  "out-arcs including k - 1 compatible source-sink arcs")
    if inst.k < 2:
        raise ValidationError("the construction needs k >= 2")
    theta = require_integer(inst.theta, "demand")
    g = inst.graph
    compat = inst.compat
    order = topological_arc_order(g, last=clique)
    pos = {a: i for i, a in enumerate(order)}
    pairs = [(order[j], order[i]) for j in range(len(order)) for i in range(j)
             if not compat.adjacent(order[j], order[i])]
    pairs.sort(key=lambda p: (pos[p[0]], pos[p[1]]))
    n_arcs = len(order)
    n_pairs = len(pairs)
    M = max(2 * (n_arcs - 1) * n_pairs + 3, theta + 2)
    filler = M - 2 * n_pairs - 1
    d_pair = 2 * (n_arcs - 1)
    d_0 = theta + n_arcs * filler

    b = GraphBuilder()
    for v in g.nodes:
        b.node(v, "original node", exact=True)
    plus, minus = {}, {}
    for a in order:
        plus[a] = b.node(f"v+[{a}]", f"subdivision node v+ of arc {a!r}")
        minus[a] = b.node(f"v-[{a}]", f"subdivision node v- of arc {a!r}")
    cid = {I0: I0}
    for a, a2 in pairs:
        cid[(a, a2)] = f"F({a},{a2})"
    src, snk = {}, {}
    for key in [I0] + pairs:
        c = cid[key]
        src[key] = b.node(f"s[{c}]", f"source of commodity {c}")
        snk[key] = b.node(f"t[{c}]", f"sink of commodity {c}")

    entry = b.arc("entry", src[I0], inst.source, theta, "arc (s_i0, s) into the original source")
    exit_ = b.arc("exit", inst.sink, snk[I0], theta, "arc (t, t_i0) out of the original sink")
    arc_in, arc_mid, arc_out, feed, drain = {}, {}, {}, {}, {}
    for a in order:
        arc = g.arc(a)
        arc_in[a] = b.arc(f"in[{a}]", arc.tail, plus[a], 1, f"subdivision of {a!r}: first arc")
        arc_mid[a] = b.arc(f"mid[{a}]", plus[a], minus[a], M, f"subdivision of {a!r}: middle arc")
        arc_out[a] = b.arc(f"out[{a}]", minus[a], arc.head, 1, f"subdivision of {a!r}: last arc")
        for key in pairs:
            if key[1] != a:
                feed[(key, a)] = b.arc(f"src[{cid[key]}|{a}]", src[key], plus[a], 2,
                                       f"source arc of commodity {cid[key]} into {a!r}")
            if key[0] != a:
                drain[(key, a)] = b.arc(f"snk[{cid[key]}|{a}]", minus[a], snk[key], 2,
                                        f"sink arc of commodity {cid[key]} out of {a!r}")
        feed[(I0, a)] = b.arc(f"src[{I0}|{a}]", src[I0], plus[a], filler,
                              f"filler arc of commodity i0 into {a!r}")
        drain[(I0, a)] = b.arc(f"snk[{I0}|{a}]", minus[a], snk[I0], filler,
                               f"filler arc of commodity i0 out of {a!r}")
    cross = {}
    for a, a2 in pairs:
        cross[(a, a2)] = b.arc(f"F[{a},{a2}]", minus[a], plus[a2], 2, f"F-pair ({a!r}, {a2!r})")

    commodities = [Commodity(I0, src[I0], snk[I0], d_0)]
    b.provenance[(COMMODITY, I0)] = "commodity i0 (carries the original flow)"
    for key in pairs:
        commodities.append(Commodity(cid[key], src[key], snk[key], d_pair))
        b.provenance[(COMMODITY, cid[key])] = f"commodity for F-pair ({key[0]!r}, {key[1]!r})"
    out = MrfMInstance(b.digraph(), inst.k, tuple(commodities), I0)

    cut = tuple([src[key] for key in [I0] + pairs] + [inst.source] + [plus[a] for a in clique])
    params = {
        "M": M, "theta": theta, "F": tuple(pairs), "order": tuple(order), "i0": I0,
        "clique_arcs": clique, "commodity_ids": cid, "d_pair": d_pair, "d_0": d_0,
        "filler": filler, "cut": cut, "arc_in": arc_in, "arc_mid": arc_mid, "arc_out": arc_out,
        "feed": feed, "drain": drain, "cross": cross, "entry": entry, "exit": exit_,
        "source": inst.source, "sink": inst.sink,
    }
    return ReductionArtifact(KIND, out, inst, b.provenance, params)


def _check(artifact: ReductionArtifact) -> None:
    if artifact.kind != KIND:
        raise ValidationError(f"expected a {KIND} artifact, got {artifact.kind}")


def hat_flow(artifact: ReductionArtifact) -> PathFlow:
    """The flow of the pair commodities, which every feasible flow must use."""
    _check(artifact)
    p = artifact.parameters
    mid, feed, drain, cross = p["arc_mid"], p["feed"], p["drain"], p["cross"]
    entries = []
    for key in p["F"]:
        a, a2 = key
        c = p["commodity_ids"][key]
        entries.append((Path((feed[(key, a)], mid[a], cross[key], mid[a2], drain[(key, a2)]), c), 2))
        for other in p["order"]:
            if other not in key:
                entries.append((Path((feed[(key, other)], mid[other], drain[(key, other)]), c), 2))
    return PathFlow(entries)


# -- properties ----------------------------------------------------------------

@dataclass(frozen=True)
class PropertyResult:
    number: int
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PropertyReport:
    results: tuple

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def __bool__(self):
        return self.ok

    def failures(self) -> list[PropertyResult]:
        return [r for r in self.results if not r.passed]


def check_properties(artifact: ReductionArtifact, flows: Iterable[PathFlow] = ()) -> PropertyReport:
    """Check the five structural guarantees of the output instance.

    The per-commodity arc guarantee is checked on the pair-commodity flow
    and on every extra feasible flow passed in ``flows``.
    """
    _check(artifact)
    inst: MrfMInstance = artifact.instance
    g = inst.graph
    p = artifact.parameters
    origin: MrfRInstance = artifact.origin
    M = inst.M
    results = []

    # 1: integral capacities, M as given by the formula
    n_arcs, n_pairs = len(origin.graph.arcs), len(p["F"])
    expect = max(2 * (n_arcs - 1) * n_pairs + 3, int(origin.theta) + 2)
    bad = [a.id for a in g.arcs if a.capacity.denominator != 1]
    if bad:
        results.append(PropertyResult(1, False, f"non-integral capacity on {bad[0]!r}"))
    elif M != expect:
        results.append(PropertyResult(1, False, f"M = {M}, formula gives {expect}"))
    else:
        results.append(PropertyResult(1, True, f"M = {M}"))

    # 2: each commodity's source and sink capacity equals its demand
    problem = ""
    for c in inst.commodities:
        out_cap = sum((a.capacity for a in g.out_arcs(c.source)), Fraction(0))
        in_cap = sum((a.capacity for a in g.in_arcs(c.sink)), Fraction(0))
        if g.in_arcs(c.source) or g.out_arcs(c.sink):
            problem = f"commodity {c.id!r}: source has in-arcs or sink has out-arcs"
        elif out_cap != c.demand or in_cap != c.demand:
            problem = f"commodity {c.id!r}: capacities {out_cap}/{in_cap} vs demand {c.demand}"
        if problem:
            break
    results.append(PropertyResult(2, not problem, problem))

    # 3: the other commodities' demands fit below M - 3
    rest = sum((c.demand for c in inst.commodities if c.id != inst.i0), Fraction(0))
    results.append(PropertyResult(3, rest <= M - 3, f"sum of other demands {rest}, M - 3 = {M - 3}"))

    # 4: every other commodity puts at least 2 on each arc of capacity >= M - 2
    heavy = [a.id for a in g.arcs if a.capacity >= M - 2]
    problem = ""
    for idx, flow in enumerate([hat_flow(artifact)] + list(flows)):
        viol = flow_violations(flow, inst, require_demand=False)
        if viol:
            problem = f"flow {idx} is infeasible: {viol[0].kind} {viol[0].element!r}"
            break
        for c in inst.commodities:
            if c.id == inst.i0:
                continue
            per = flow.restrict(c.id)
            if idx > 0 and not per:
                continue
            arcs = per.arc_flows()
            for a in heavy:
                if arcs.get(a, 0) < 2:
                    problem = f"flow {idx}: commodity {c.id!r} sends {arcs.get(a, 0)} over {a!r}"
                    break
            if problem:
                break
        if problem:
            break
    results.append(PropertyResult(4, not problem, problem))

    # 5: the recorded cut
    U = set(p["cut"])
    leaving = [a for a in g.arcs if a.tail in U and a.head not in U]
    cap = sum((a.capacity for a in leaving), Fraction(0))
    total = sum((c.demand for c in inst.commodities), Fraction(0))
    full = sum(1 for a in leaving if a.capacity == M)
    sides = all(c.source in U and c.sink not in U for c in inst.commodities)
    ok5 = sides and cap == total and full == inst.k - 1
    results.append(PropertyResult(5, ok5, f"cut capacity {cap} (demand {total}), "
                                          f"{full} arcs of capacity M, sides ok: {sides}"))
    return PropertyReport(tuple(results))


# -- witness maps --------------------------------------------------------------

def mrfm_flow_from_mrfr(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Multicommodity witness from a witness of the normalized instance."""
    _check(artifact)
    problems = witness_problems(artifact.origin, flow)
    if problems:
        raise ValidationError("flow is not a witness: " + "; ".join(problems))
    p = artifact.parameters
    entries = list(hat_flow(artifact).items())
    for path, v in flow.items():
        arcs = [p["entry"]]
        for a in path.arcs:
            arcs.extend((p["arc_in"][a], p["arc_mid"][a], p["arc_out"][a]))
        arcs.append(p["exit"])
        entries.append((Path(tuple(arcs), I0), v))
    for a in p["order"]:
        entries.append((Path((p["feed"][(I0, a)], p["arc_mid"][a], p["drain"][(I0, a)]), I0),
                        p["filler"]))
    out = PathFlow(entries)
    problems = witness_problems(artifact.instance, out)
    if problems:
        raise AssertionError("lifted flow is not a witness: " + "; ".join(problems))
    return out


def mrfr_flow_from_mrfm(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Recover a witness of the normalized instance from a multicommodity witness.

    Commodity-i0 paths that enter a subdivided arc through its first arc
    but leave through the filler arc (or the reverse) are recombined in
    pairs until every path either follows subdivided arcs end to end or is
    a filler path; the end-to-end paths are the recovered flow.
    """
    _check(artifact)
    problems = witness_problems(artifact.instance, flow)
    if problems:
        raise ValidationError("flow is not a witness: " + "; ".join(problems))
    p = artifact.parameters
    arc_in, arc_mid, arc_out = p["arc_in"], p["arc_mid"], p["arc_out"]
    feed = {a: p["feed"][(I0, a)] for a in p["order"]}
    drain = {a: p["drain"][(I0, a)] for a in p["order"]}
    paths = {path.arcs: v for path, v in flow.items() if path.commodity == I0}

    def crossing(arcs: tuple):
        on = set(arcs)
        for a in p["order"]:
            if (arc_in[a] in on) != (arc_out[a] in on):
                return a
        return None

    steps = 0
    while True:
        target = None
        for arcs in sorted(paths, key=lambda t: tuple(map(id_key, t))):
            a = crossing(arcs)
            if a is not None:
                target = (arcs, a)
                break
        if target is None:
            break
        steps += 1
        if steps > UNCROSS_LIMIT:
            raise ResourceLimitError("uncrossing steps", UNCROSS_LIMIT)
        q, a = target
        if arc_in[a] not in q:
            # q leaves through arc_out; find its partner entering through arc_in
            partner = next((r for r in sorted(paths, key=lambda t: tuple(map(id_key, t)))
                            if arc_in[a] in r and arc_out[a] not in r), None)
            q, r = partner, q
        else:
            r = next((r for r in sorted(paths, key=lambda t: tuple(map(id_key, t)))
                      if arc_out[a] in r and arc_in[a] not in r), None)
        if q is None or r is None:
            raise ValidationError(f"commodity i0 is unbalanced around arc {a!r}")
        eps = min(paths[q], paths[r])
        head = q[:q.index(arc_mid[a]) + 1]
        tail = r[r.index(arc_mid[a]) + 1:]
        merged = head + tail
        filler = (feed[a], arc_mid[a], drain[a])
        for old in (q, r):
            paths[old] -= eps
            if paths[old] == 0:
                del paths[old]
        for new in (merged, filler):
            paths[new] = paths.get(new, Fraction(0)) + eps
    entries = []
    for arcs, v in paths.items():
        if arcs[0] != p["entry"]:
            continue
        if arcs[-1] != p["exit"]:
            raise ValidationError(f"path {arcs!r} enters the original source but does not "
                                  "leave through the original sink")
        original = tuple(a for a in p["order"] if arc_mid[a] in set(arcs))
        pos = {x: i for i, x in enumerate(arcs)}
        original = tuple(sorted(original, key=lambda a: pos[arc_mid[a]]))
        entries.append((Path(original), v))
    out = PathFlow(entries)
    problems = witness_problems(artifact.origin, out)
    if problems:
        raise AssertionError("recovered flow is not a witness: " + "; ".join(problems))
    return out
