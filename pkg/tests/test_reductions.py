from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mrflab.errors import ResourceLimitError, ValidationError
from mrflab.instances import (Arc, CompatGraph, Digraph, MrfInstance, MrfRInstance, PathFlow,
                              witness_problems)
from mrflab.oracles import (UndirectedGraph, clique_interdiction_bruteforce,
                            fractional_chromatic_number)
from mrflab.reductions import (check_properties, coloring_from_flow, combine_clique_flow,
                               contract_flow, expand_flow, expand_immune, flow_from_coloring,
                               flow_from_interdiction_set, hat_flow, interdiction_problems,
                               interdiction_set_from_flow, matchingize_compat, mrfr_to_mrf,
                               normalize_mrfr, pad_budget, reduce_clique_interdiction,
                               reduce_coloring_to_mrfr, reduce_mrfm_to_mrf, reduce_mrfr_to_mrfm,
                               saturate_demand, wagner_union)
from mrflab.solvers import decide_mrf_r_star

from corpora import pipeline_corpus

PIPELINE = pipeline_corpus()


def k3():
    return UndirectedGraph.complete(3)


# -- fractional coloring -------------------------------------------------------

@pytest.mark.parametrize("graph,colors,nodes,arcs,compat", [
    (UndirectedGraph.complete(3), 3, 4, 9, 3),
    (UndirectedGraph.path(2), 2, 2, 2, 0),
    (UndirectedGraph.cycle(5), 2, 6, 10, 5),
])
def test_coloring_structure(graph, colors, nodes, arcs, compat):
    inst = reduce_coloring_to_mrfr(graph, colors).instance
    assert (len(inst.graph.nodes), len(inst.graph.arcs), len(inst.compat.edges)) == (nodes, arcs, compat)
    assert inst.k == 2 and inst.theta == colors


def test_edgeless_graph_is_rejected():
    with pytest.raises(ValidationError):
        reduce_coloring_to_mrfr(UndirectedGraph(range(3), []), 2)


@pytest.mark.parametrize("graph,colors", [(UndirectedGraph.complete(3), 3),
                                          (UndirectedGraph.cycle(5), 3)])
def test_coloring_witness_round_trip(graph, colors):
    art = reduce_coloring_to_mrfr(graph, colors)
    d = decide_mrf_r_star(art.instance)
    assert d.answer
    coloring = coloring_from_flow(art, d.witness)
    assert coloring.problems(graph) == []
    assert coloring.total() <= colors
    chi, _ = fractional_chromatic_number(graph)
    assert chi <= coloring.total()


def test_integral_coloring_gives_unit_flow():
    art = reduce_coloring_to_mrfr(k3(), 3)
    coloring = {frozenset({v}): Fraction(1) for v in k3().vertices}
    flow = flow_from_coloring(art, coloring)
    assert flow.value() == 3
    assert all(v <= 1 for v in flow.arc_flows().values())
    assert witness_problems(art.instance, flow) == []


def test_padded_five_cycle_coloring():
    art = reduce_coloring_to_mrfr(UndirectedGraph.cycle(5), 3)
    _, coloring = fractional_chromatic_number(UndirectedGraph.cycle(5))
    flow = flow_from_coloring(art, coloring)
    assert witness_problems(art.instance, flow) == []


# -- normalization and the multicommodity instance -------------------------------

def test_normalize_bundle_chain():
    art = normalize_mrfr(reduce_coloring_to_mrfr(k3(), 3).instance)
    inst = art.instance
    assert inst.theta == 4 and inst.k == 2
    assert len(art.parameters["clique_arcs"]) == 1
    assert len(inst.graph.out_arcs(inst.source)) == 4
    assert len(inst.graph.arcs) == 9 + 3 + 1


def test_normalize_is_idempotent():
    once = normalize_mrfr(reduce_coloring_to_mrfr(k3(), 3).instance)
    twice = normalize_mrfr(once.instance)
    assert twice.parameters["identity"]
    assert twice.instance.graph.arcs == once.instance.graph.arcs


def _formula_check(art):
    p = art.parameters
    inst = art.instance
    normalized = art.origin
    n_arcs = len(normalized.graph.arcs)
    n_pairs = len(p["F"])
    assert p["M"] == max(2 * (n_arcs - 1) * n_pairs + 3, p["theta"] + 2)
    assert p["d_pair"] == 2 * (n_arcs - 1)
    assert p["d_0"] == p["theta"] + n_arcs * (p["M"] - 2 * n_pairs - 1)
    assert len(inst.graph.nodes) == len(normalized.graph.nodes) + 2 * n_arcs + 2 * (n_pairs + 1)
    assert inst.M == p["M"]


def test_multicommodity_parameters_on_bundle_chain():
    art = reduce_mrfr_to_mrfm(normalize_mrfr(reduce_coloring_to_mrfr(k3(), 3).instance))
    _formula_check(art)
    assert art.parameters["M"] == 1803
    report = check_properties(art)
    assert not report.failures()


def test_multicommodity_rejects_unnormalized_input():
    inst = reduce_coloring_to_mrfr(k3(), 3).instance
    with pytest.raises(ValidationError):
        reduce_mrfr_to_mrfm(inst)


def test_hat_flow_totals():
    art = reduce_mrfr_to_mrfm(normalize_mrfr(reduce_coloring_to_mrfr(k3(), 3).instance))
    hat = hat_flow(art)
    for c in art.instance.commodities:
        if c.id != art.instance.i0:
            assert hat.value(c.id) == art.parameters["d_pair"]


@settings(max_examples=15)
@given(st.integers(0, 31))
def test_multicommodity_construction_invariants(idx):
    inst = PIPELINE[idx]
    art = reduce_mrfr_to_mrfm(normalize_mrfr(inst))
    _formula_check(art)
    assert art.untagged() == []
    assert not check_properties(art).failures()


# -- wrapper and immune arcs ---------------------------------------------------

def test_wrapper_constants_and_balance():
    art = reduce_mrfr_to_mrfm(normalize_mrfr(PIPELINE[0]))
    wrap = reduce_mrfm_to_mrf(art)
    p = wrap.parameters
    assert p["M_prime"] == p["M"] + 2 * p["k"] - 3
    assert wrap.untagged() == []
    g = wrap.instance.graph
    terminals = {wrap.instance.source, wrap.instance.sink}
    inner = set(art.instance.graph.nodes)
    for v in g.nodes:
        if v in terminals or v in inner:
            continue
        cap_in = sum(a.capacity for a in g.in_arcs(v))
        cap_out = sum(a.capacity for a in g.out_arcs(v))
        assert cap_in == cap_out, v


def _immune_instance():
    g = Digraph(("s", "v", "t"), (Arc("a", "s", "v", 3, immune=True), Arc("b", "v", "t", 2)))
    return MrfInstance(g, "s", "t", 1)


def test_expand_immune_units():
    art = expand_immune(_immune_instance())
    g = art.instance.graph
    assert sorted(g.arc_ids) == ["a#1", "a#2", "a#3", "b"]
    assert all(not a.immune for a in g.arcs)
    flow = PathFlow({("a", "b"): 2})
    expanded = expand_flow(art, flow)
    assert contract_flow(art, expanded) == flow


def test_expand_without_immune_arcs_is_identity():
    inst = MrfInstance(Digraph(("s", "t"), (Arc("a", "s", "t"),)), "s", "t", 1)
    assert expand_immune(inst).instance.graph.arcs == inst.graph.arcs


def test_expand_guard():
    with pytest.raises(ResourceLimitError):
        expand_immune(_immune_instance(), max_units=2)


def test_chain_keeps_budget():
    for inst in PIPELINE[:6]:
        chain = mrfr_to_mrf(inst, expand=False)
        assert chain.instance.k == inst.k


# -- clique interdiction ---------------------------------------------------------

@pytest.mark.parametrize("graph,size,budget", [
    (UndirectedGraph.complete(3), 3, 1), (UndirectedGraph.complete(4), 3, 1),
    (UndirectedGraph.complete(4), 3, 2), (UndirectedGraph.cycle(5), 3, 1),
])
def test_clique_reduction_shape_and_answer(graph, size, budget):
    art = reduce_clique_interdiction(graph, size, budget)
    inst = art.instance
    n = len(graph.vertices)
    assert len(inst.graph.arcs) == 12 * n + size + 1
    assert inst.integral and inst.k == size + 1
    expected, _ = clique_interdiction_bruteforce(graph, size, budget)
    d = decide_mrf_r_star(inst)
    assert d.answer == expected
    if d.answer:
        chosen = interdiction_set_from_flow(art, d.witness)
        assert interdiction_problems(graph, size, budget, chosen) == []


def test_interdiction_set_round_trip():
    art = reduce_clique_interdiction(k3(), 3, 1)
    flow = flow_from_interdiction_set(art, {2})
    assert witness_problems(art.instance, flow) == []
    assert interdiction_set_from_flow(art, flow) == frozenset({2})


def test_flow_without_spine_is_rejected():
    art = reduce_clique_interdiction(k3(), 3, 1)
    flow = flow_from_interdiction_set(art, {1})
    spine = [p for p in flow if art.parameters["a_s"] in p.arcs]
    broken = PathFlow({p: v for p, v in flow.items() if p not in spine})
    with pytest.raises(ValidationError):
        interdiction_set_from_flow(art, broken)


# -- shaping, combining and unions ---------------------------------------------

def _two_paths(compat_pairs=(), theta=2, k=2):
    g = Digraph(("s", "v", "t"), (Arc("a", "s", "v"), Arc("b", "v", "t"),
                                  Arc("c", "s", "v"), Arc("d", "v", "t")))
    return MrfRInstance(g, "s", "t", k, CompatGraph(frozenset(frozenset(p) for p in compat_pairs)),
                        theta)


def test_matchingize_identity_on_matching():
    inst = _two_paths([("a", "b")])
    assert matchingize_compat(inst).instance.graph.arcs == inst.graph.arcs


def test_matchingize_splits_high_degree_arc():
    inst = _two_paths([("a", "b"), ("a", "c"), ("a", "d")])
    art = matchingize_compat(inst)
    segs = art.parameters["segments"]["a"]
    assert len(segs) == 3
    out = art.instance.compat
    assert [out.degree(s) for s in segs] == [1, 1, 1]
    assert decide_mrf_r_star(art.instance).answer == decide_mrf_r_star(inst).answer


def test_pad_budget():
    inst = _two_paths([("a", "b")])
    art = pad_budget(inst, 4)
    out = art.instance
    assert out.k == 4 and out.theta == inst.theta + 2
    assert len(out.graph.arcs) == len(inst.graph.arcs) + 2
    assert decide_mrf_r_star(out).answer == decide_mrf_r_star(inst).answer


def test_saturate_demand_caps_max_flow():
    inst = _two_paths(theta=1)
    out = saturate_demand(inst).instance
    assert len(out.graph.out_arcs(out.source)) == 1
    assert decide_mrf_r_star(out).answer == decide_mrf_r_star(inst).answer


def test_combine_rejects_large_clique():
    flow_inst = saturate_demand(_two_paths([("a", "b")])).instance
    with pytest.raises(ValidationError):
        combine_clique_flow((UndirectedGraph.complete(3), 2), flow_inst)


def test_union_single_and_pairs():
    yes = saturate_demand(_two_paths([("a", "d")])).instance
    no = saturate_demand(_two_paths([("a", "c")])).instance
    assert decide_mrf_r_star(yes).answer and not decide_mrf_r_star(no).answer
    assert decide_mrf_r_star(wagner_union([yes]).instance).answer
    assert decide_mrf_r_star(wagner_union([yes, yes]).instance).answer
    assert not decide_mrf_r_star(wagner_union([yes, no]).instance).answer


def test_union_rejects_mixed_budgets():
    a = saturate_demand(_two_paths(k=2)).instance
    b = saturate_demand(_two_paths(k=3)).instance
    with pytest.raises(ValidationError):
        wagner_union([a, b])


SMALL_GRAPHS = [UndirectedGraph.complete(3), UndirectedGraph.cycle(5), UndirectedGraph.path(4),
                UndirectedGraph.complete(4), UndirectedGraph(range(1, 5), [(1, 2), (2, 3), (1, 3), (3, 4)])]


@pytest.mark.parametrize("graph", SMALL_GRAPHS)
def test_coloring_equivalence_and_saturation(graph):
    chi, _ = fractional_chromatic_number(graph)
    for colors in (2, 3, 4):
        art = reduce_coloring_to_mrfr(graph, colors)
        d = decide_mrf_r_star(art.instance)
        assert d.answer == (chi <= colors)
        if d.answer:
            flows = d.witness.arc_flows()
            assert all(flows.get(a.id, 0) == a.capacity for a in art.instance.graph.arcs)
