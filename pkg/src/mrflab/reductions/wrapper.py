"""Multicommodity robust flow as a single-commodity robust flow.

A wrapper network around the multicommodity digraph feeds every commodity
from one super source and collects it at one super sink.  Most wrapper
arcs are immune; :func:`expand_immune` replaces them by bundles of unit
arcs so the result is a plain robust flow instance.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import ResourceLimitError, ValidationError
from ..instances import (Arc, Digraph, MrfInstance, MrfMInstance, Path, PathFlow, check_path,
                         witness_problems)
from .artifact import GraphBuilder, ReductionArtifact, require_integer
from .multicommodity import KIND as MULTI_KIND, check_properties

KIND = "mrf_m->mrf"
EXPAND = "immune->bundles"
MAX_UNIT_ARCS = 200_000


def _structural_problems(inst: MrfMInstance) -> list[str]:
    """The capacity and demand guarantees that can be read off a bare instance."""
    out = []
    g = inst.graph
    M = inst.M
    for a in g.arcs:
        if a.capacity.denominator != 1:
            out.append(f"property 1: capacity of {a.id!r} is not integral")
    for c in inst.commodities:
        if c.demand.denominator != 1:
            out.append(f"property 1: demand of {c.id!r} is not integral")
        if g.in_arcs(c.source) or g.out_arcs(c.sink):
            out.append(f"property 2: terminals of {c.id!r} are not a pure source and sink")
        out_cap = sum((a.capacity for a in g.out_arcs(c.source)), Fraction(0))
        in_cap = sum((a.capacity for a in g.in_arcs(c.sink)), Fraction(0))
        if out_cap != c.demand or in_cap != c.demand:
            out.append(f"property 2: terminal capacity of {c.id!r} is {out_cap}/{in_cap}, "
                       f"demand {c.demand}")
    rest = sum((c.demand for c in inst.commodities if c.id != inst.i0), Fraction(0))
    if rest > M - 3:
        out.append(f"property 3: other demands sum to {rest} > M - 3 = {M - 3}")
    return out


def reduce_mrfm_to_mrf(source) -> ReductionArtifact:
    """Wrap a multicommodity instance into a single-source robust flow instance.

    ``source`` is either the artifact of :func:`reduce_mrfr_to_mrfm`, in
    which case all five structural properties are checked, or a bare
    :class:`MrfMInstance`, for which only the properties visible from the
    instance itself (capacities, terminal balance, demand total) are.
    """
    if isinstance(source, ReductionArtifact):
        if source.kind != MULTI_KIND:
            raise ValidationError(f"expected a {MULTI_KIND} artifact, got {source.kind}")
        inst: MrfMInstance = source.instance
        report = check_properties(source)
        problems = [f"property {r.number}: {r.detail}" for r in report.failures()]
    elif isinstance(source, MrfMInstance):
        inst = source
        problems = _structural_problems(inst)
    else:
        raise ValidationError(f"cannot wrap a {type(source).__name__}")
    if problems:
        raise ValidationError("input lacks the required structure: " + "; ".join(problems))

    g = inst.graph
    k = inst.k
    M = int(inst.M)
    Mp = M + 2 * k - 3
    zero = inst.commodity(inst.i0)
    others = [c for c in inst.commodities if c.id != inst.i0]
    m = len(others)
    if m == 0:
        raise ValidationError("the wrapper needs at least one commodity besides the designated one")
    demand = {c.id: require_integer(c.demand, f"demand of {c.id!r}") for c in inst.commodities}
    total_rest = sum(demand[c.id] for c in others)
    xi_s = {c.id: Mp - 2 * k - total_rest for c in others}
    xi_t = {c.id: demand[c.id] * (M - 1 - m) for c in others}

    b = GraphBuilder(reserved=set(g.nodes) | set(g.arc_ids))
    for v in g.nodes:
        b.node(v, "node of the multicommodity network", exact=True)
    root = b.node("s'", "super source s'")
    sink = b.node("t'", "super sink t'")
    bar = b.node("s_bar", "chain end s_bar")
    entry = {c.id: b.node(f"s'[{c.id}]", f"entry node s'_i of commodity {c.id!r}") for c in others}

    arcs: dict = {}
    arcs["zero_in"] = b.arc(f"s'>{zero.id}", root, zero.source, demand[zero.id],
                            f"immune arc (s', s_0), capacity d_0 = {demand[zero.id]}", immune=True)
    arcs["zero_out"] = b.arc(f"{zero.id}>t'", zero.sink, sink, demand[zero.id],
                             f"immune arc (t_0, t'), capacity d_0 = {demand[zero.id]}", immune=True)
    feed, head, chain, cross, bundle, xs_arc, xt_arc = {}, {}, {}, {}, {}, {}, {}
    for n, c in enumerate(others):
        cap = Mp if n == 0 else Mp - 2 * k
        feed[c.id] = b.arc(f"s'>s'[{c.id}]", root, entry[c.id], cap,
                           f"immune arc (s', s'_i) for {c.id!r}, capacity {cap}", immune=True)
    arcs["bar_in"] = b.arc("s'>s_bar", root, bar, 2 * k * (M - 2),
                           f"immune arc (s', s_bar), capacity 2k(M-2) = {2 * k * (M - 2)}",
                           immune=True)
    bar_bundle = tuple(b.arc(f"s_bar>t'#{j}", bar, sink, M - 1,
                             f"bundle A_bar member {j}, capacity M-1") for j in range(1, 2 * k + 1))
    for n, c in enumerate(others):
        i = c.id
        head[i] = b.arc(f"s'[{i}]>{i}", entry[i], c.source, Mp,
                        f"arc (s'_i, s_i) for {i!r}, capacity M' = {Mp}")
        nxt = entry[others[n + 1].id] if n + 1 < m else bar
        chain[i] = b.arc(f"{i}>next", c.source, nxt, 2 * k,
                         f"immune chain arc (s_i, s'_(i+1)) for {i!r}, capacity 2k", immune=True)
        for other in others:
            if other.id != i:
                cross[(i, other.id)] = b.arc(
                    f"{i}>{other.id}", c.source, other.sink, demand[other.id],
                    f"immune cross arc (s_i, t_j) for {i!r} -> {other.id!r}, capacity d_j",
                    immune=True)
        bundle[i] = tuple(b.arc(f"{i}>t'#{j}", c.sink, sink, M - 1,
                                f"bundle A_i of {i!r} member {j}, capacity M-1")
                          for j in range(1, demand[i] + 1))
        xs_arc[i] = b.arc(f"{i}>t'", c.source, sink, xi_s[i],
                          f"immune arc (s_i, t') for {i!r}, capacity xi^s = {xi_s[i]}", immune=True)
        xt_arc[i] = b.arc(f"s'>{i}", root, c.sink, xi_t[i],
                          f"immune arc (s', t_i) for {i!r}, capacity xi^t = {xi_t[i]}", immune=True)

    nodes = tuple(b.nodes)
    new_arcs = tuple(g.arcs) + tuple(b.arcs)
    digraph = Digraph(nodes, new_arcs)
    provenance = dict(b.provenance)
    for a in g.arcs:
        provenance[("arc", a.id)] = "arc of the multicommodity network"
    delta = sum((a.capacity for a in digraph.out_arcs(root)), Fraction(0))
    threshold = delta - (k * M - 1)
    out = MrfInstance(digraph, root, sink, k, threshold)
    params = {
        "M": M, "M_prime": Mp, "k": k, "m": m, "Delta": delta, "L": threshold,
        "xi_s": xi_s, "xi_t": xi_t, "i0": zero.id, "others": tuple(c.id for c in others),
        "demand": demand, "root": root, "sink": sink, "bar": bar, "entry": entry,
        "zero_in": arcs["zero_in"], "zero_out": arcs["zero_out"], "feed": feed, "head": head,
        "chain": chain, "cross": cross, "bundle": bundle, "bar_in": arcs["bar_in"],
        "bar_bundle": bar_bundle, "xi_s_arc": xs_arc, "xi_t_arc": xt_arc,
        "inner_arcs": frozenset(a.id for a in g.arcs),
    }
    return ReductionArtifact(KIND, out, source, provenance, params)


def _check(artifact: ReductionArtifact) -> None:
    if artifact.kind != KIND:
        raise ValidationError(f"expected a {KIND} artifact, got {artifact.kind}")


def _multi(artifact: ReductionArtifact) -> MrfMInstance:
    origin = artifact.origin
    return origin.instance if isinstance(origin, ReductionArtifact) else origin


def _prefix(p, i) -> tuple:
    return (p["feed"][i], p["head"][i])


def base_flow(artifact: ReductionArtifact) -> PathFlow:
    """The flow that saturates the wrapper, leaving room for the commodities."""
    _check(artifact)
    p = artifact.parameters
    others = p["others"]
    M = p["M"]
    entries = []
    spine = []
    for i in others:
        spine.extend(_prefix(p, i) if not spine else (p["head"][i],))
        spine.append(p["chain"][i])
    for a in p["bar_bundle"]:
        entries.append((Path(tuple(spine) + (a,)), Fraction(1)))
    for a in p["bar_bundle"]:
        entries.append((Path((p["bar_in"], a)), Fraction(M - 2)))
    for i in others:
        if p["xi_s"][i]:
            entries.append((Path(_prefix(p, i) + (p["xi_s_arc"][i],)), Fraction(p["xi_s"][i])))
        share = Fraction(p["xi_t"][i], p["demand"][i])
        if share:
            for a in p["bundle"][i]:
                entries.append((Path((p["xi_t_arc"][i], a)), share))
        for j in others:
            if j != i:
                for a in p["bundle"][j]:
                    entries.append((Path(_prefix(p, i) + (p["cross"][(i, j)], a)), Fraction(1)))
    return PathFlow(entries)


def lift_flow(artifact: ReductionArtifact, flow: PathFlow, integral: bool = False) -> PathFlow:
    """Extend a multicommodity witness into the wrapper and add the base flow.

    Each commodity path is prefixed by its entry arcs and spread evenly over
    the commodity's sink bundle.  With ``integral`` the paths are cut into
    unit pieces instead and each piece gets its own bundle arc.
    """
    _check(artifact)
    p = artifact.parameters
    multi = _multi(artifact)
    problems = witness_problems(multi, flow)
    if problems:
        raise ValidationError("flow is not a multicommodity witness: " + "; ".join(problems))
    entries = list(base_flow(artifact).items())
    units: dict = {i: [] for i in p["others"]}
    for path, v in flow.items():
        c = path.commodity
        if c == p["i0"]:
            entries.append((Path((p["zero_in"],) + path.arcs + (p["zero_out"],)), v))
        elif integral:
            if v.denominator != 1:
                raise ValidationError(f"path value {v} is not integral")
            units[c].extend([path.arcs] * int(v))
        else:
            share = v / p["demand"][c]
            for a in p["bundle"][c]:
                entries.append((Path(_prefix(p, c) + path.arcs + (a,)), share))
    if integral:
        for c, pieces in units.items():
            # one unit per bundle arc: a perfect matching by position
            for arcs, a in zip(pieces, p["bundle"][c]):
                entries.append((Path(_prefix(p, c) + arcs + (a,)), Fraction(1)))
    lifted = PathFlow(entries)
    problems = witness_problems(artifact.instance, lifted)
    if problems:
        raise AssertionError("lifted flow is not a witness: " + "; ".join(problems))
    return lifted


def project_flow(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Keep the part of every wrapper path inside the multicommodity network.

    Parts that form a path of some commodity are summed per path; the
    result is re-validated as a multicommodity witness.
    """
    _check(artifact)
    problems = witness_problems(artifact.instance, flow)
    if problems:
        raise ValidationError("flow is not a witness: " + "; ".join(problems))
    p = artifact.parameters
    multi = _multi(artifact)
    g = multi.graph
    inner = p["inner_arcs"]
    ends: dict = {}
    for c in multi.commodities:
        ends.setdefault((c.source, c.sink), c.id)
    entries = []
    for path, v in flow.items():
        part = tuple(a for a in path.arcs if a in inner)
        if not part:
            continue
        key = (g.arc(part[0]).tail, g.arc(part[-1]).head)
        cid = ends.get(key)
        if cid is None:
            continue
        try:
            check_path(g, Path(part, cid), *key)
        except ValidationError:
            continue
        entries.append((Path(part, cid), v))
    projected = PathFlow(entries)
    problems = witness_problems(multi, projected)
    if problems:
        raise ValidationError("projection is not a multicommodity witness: " + "; ".join(problems))
    return projected


# -- immune arcs -----------------------------------------------------------------

def expand_immune(source, max_units: int = MAX_UNIT_ARCS) -> ReductionArtifact:
    """Replace every immune arc of capacity ``u`` by ``u`` parallel unit arcs.

    Accepts an :class:`MrfInstance` or an artifact holding one.  Unit arcs
    are named ``<parent>#<j>``; arcs of capacity zero disappear.  More than
    ``max_units`` unit arcs in total raises :class:`ResourceLimitError`.
    """
    inst = source.instance if isinstance(source, ReductionArtifact) else source
    if not isinstance(inst, MrfInstance):
        raise ValidationError(f"cannot expand a {type(inst).__name__}")
    g = inst.graph
    total = sum((a.capacity for a in g.arcs if a.immune), Fraction(0))
    if total > max_units:
        raise ResourceLimitError("unit arcs replacing immune arcs", max_units)
    taken = {a.id for a in g.arcs}
    b = GraphBuilder()
    for v in g.nodes:
        b.node(v, "node kept from the input", exact=True)
    units: dict = {}
    parent: dict = {}
    arcs = []
    for a in g.arcs:
        if not a.immune:
            arcs.append(a)
            b.provenance[("arc", a.id)] = "arc kept from the input"
            continue
        u = require_integer(a.capacity, f"capacity of immune arc {a.id!r}")
        members = []
        for j in range(1, u + 1):
            name = f"{a.id}#{j}"
            while name in taken:
                name += "'"
            taken.add(name)
            aid = b.arc(name, a.tail, a.head, 1, f"unit arc {j} replacing immune arc {a.id!r}",
                        exact=True)
            members.append(aid)
            parent[aid] = a.id
            arcs.append(Arc(aid, a.tail, a.head, 1))
        units[a.id] = tuple(members)
    out = MrfInstance(Digraph(tuple(b.nodes), tuple(arcs)), inst.source, inst.sink, inst.k,
                      inst.threshold)
    return ReductionArtifact(EXPAND, out, inst, b.provenance, {"units": units, "parent": parent})


def expand_flow(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Route a flow of the immune instance through the unit arcs, filling them in order.

    A path is split where it runs over more than one unit arc, so integral
    flows stay integral.
    """
    if artifact.kind != EXPAND:
        raise ValidationError(f"expected a {EXPAND} artifact, got {artifact.kind}")
    units = artifact.parameters["units"]
    used = {a: [0, Fraction(0)] for a in units}     # current member index, flow on it
    entries = []
    for path, v in flow.items():
        pieces = [((), v)]
        for a in path.arcs:
            if a not in units:
                pieces = [(arcs + (a,), w) for arcs, w in pieces]
                continue
            nxt = []
            for arcs, w in pieces:
                while w:
                    slot = used[a]
                    if slot[0] >= len(units[a]):
                        raise ValidationError(f"flow exceeds the capacity of immune arc {a!r}")
                    take = min(w, 1 - slot[1])
                    nxt.append((arcs + (units[a][slot[0]],), take))
                    slot[1] += take
                    w -= take
                    if slot[1] == 1:
                        slot[0] += 1
                        slot[1] = Fraction(0)
            pieces = nxt
        entries.extend((Path(arcs, path.commodity), w) for arcs, w in pieces)
    return PathFlow(entries)


def contract_flow(artifact: ReductionArtifact, flow: PathFlow) -> PathFlow:
    """Map unit arcs back to the immune arc they replace."""
    if artifact.kind != EXPAND:
        raise ValidationError(f"expected a {EXPAND} artifact, got {artifact.kind}")
    parent = artifact.parameters["parent"]
    return PathFlow((Path(tuple(parent.get(a, a) for a in path.arcs), path.commodity), v)
                    for path, v in flow.items())

