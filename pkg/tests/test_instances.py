from fractions import Fraction
from itertools import combinations
from math import prod

import pytest
from hypothesis import given, strategies as st

from mrflab.errors import ResourceLimitError, ValidationError
from mrflab.instances import (AT_MOST_K, EXACTLY_K, Arc, CompatGraph, Digraph, MrfInstance,
                              MrfRInstance, Path, PathFlow, arc_flow, enumerate_scenarios,
                              enumerate_st_paths, flow_violations, loss, max_loss,
                              topological_arc_order, witness_problems, worst_case_loss)
from mrflab.oracles import UndirectedGraph, fractional_chromatic_number
from mrflab.reductions import flow_from_coloring, reduce_coloring_to_mrfr


def parallel(n, cap=1):
    return Digraph(("s", "t"), tuple(Arc(f"a{i}", "s", "t", cap) for i in range(1, n + 1)))


def figure_one():
    return reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3)


def test_single_arc_has_one_path():
    g = parallel(1)
    assert enumerate_st_paths(g, "s", "t") == [Path(("a1",))]


def test_parallel_arcs_are_distinct_paths():
    assert len(enumerate_st_paths(parallel(2), "s", "t")) == 2


def test_bundle_chain_has_27_paths():
    inst = figure_one().instance
    assert len(enumerate_st_paths(inst.graph, inst.source, inst.sink)) == 27


def test_path_limit_raises():
    inst = figure_one().instance
    with pytest.raises(ResourceLimitError):
        enumerate_st_paths(inst.graph, inst.source, inst.sink, limit=26)


def test_exactly_k_scenarios():
    assert len(enumerate_scenarios(parallel(3), 2, EXACTLY_K)) == 3


def test_at_most_k_scenarios_restricted_by_compat():
    compat = CompatGraph(frozenset({frozenset({"a1", "a2"})}))
    found = enumerate_scenarios(parallel(3), 2, AT_MOST_K, compat)
    assert len(found) == 5
    assert frozenset({"a1", "a2"}) in found


def test_clique_pairs_of_bundle_chain():
    inst = figure_one().instance
    pairs = {s for s in enumerate_scenarios(inst.graph, 2, AT_MOST_K, inst.compat) if len(s) == 2}
    assert pairs == {frozenset(e) for e in inst.compat.edges}
    assert len(pairs) == 3


def test_scenario_limit_raises():
    with pytest.raises(ResourceLimitError):
        enumerate_scenarios(parallel(6), 3, limit=10)


def test_loss_values():
    assert loss(PathFlow(), {"a1"}) == 0
    two = PathFlow({("a1",): 1, ("a2",): 1})
    assert loss(two, {"a1"}) == 1
    g = Digraph(("s", "v", "t"), (Arc("a", "s", "v"), Arc("b", "v", "t")))
    chain = PathFlow({("a", "b"): 1})
    assert loss(chain, {"a", "b"}) == 1
    assert arc_flow(chain, "a") == 1
    assert topological_arc_order(g) == ["a", "b"]


def test_parallel_order_is_by_id():
    assert topological_arc_order(parallel(3)) == ["a1", "a2", "a3"]


def test_capacity_violation_names_the_arc():
    inst = MrfInstance(parallel(1), "s", "t", 1)
    bad = PathFlow({("a1",): Fraction(3, 2)})
    (v,) = flow_violations(bad, inst)
    assert v.kind == "capacity" and v.element == "a1"


def test_invalid_path_is_rejected():
    inst = MrfInstance(parallel(1), "s", "t", 1)
    with pytest.raises(ValidationError):
        flow_violations(PathFlow({("a1", "a1"): 1}), inst)


@pytest.mark.parametrize("build", [
    lambda: Digraph(("s", "s"), ()),
    lambda: Digraph(("s",), (Arc("a", "s", "x"),)),
    lambda: Digraph(("s", "t"), (Arc("a", "s", "t"), Arc("a", "t", "s"))),
    lambda: Arc("a", "s", "s"),
    lambda: Arc("a", "s", "t", -1),
    lambda: MrfInstance(parallel(1), "s", "s", 1),
    lambda: MrfInstance(parallel(1), "s", "t", 0),
    lambda: MrfRInstance(parallel(1, 2), "s", "t", 1, CompatGraph(), 1),
    lambda: MrfRInstance(parallel(1), "s", "t", 1, CompatGraph(frozenset({frozenset({"a1", "x"})})), 1),
    lambda: MrfRInstance(Digraph(("s", "t"), (Arc("a", "s", "t"), Arc("b", "t", "s"))),
                         "s", "t", 1, CompatGraph(), 1),
])
def test_malformed_inputs(build):
    with pytest.raises(ValidationError):
        build()


def test_coloring_witness_loses_at_most_one():
    art = figure_one()
    _, coloring = fractional_chromatic_number(UndirectedGraph.complete(3))
    flow = flow_from_coloring(art, coloring)
    inst = art.instance
    worst, _ = worst_case_loss(flow, inst.graph, 2, AT_MOST_K, inst.compat)
    assert worst <= 1
    assert witness_problems(inst, flow) == []


@st.composite
def random_flows(draw):
    n_arcs = draw(st.integers(2, 6))
    arcs = [f"a{i}" for i in range(n_arcs)]
    paths = draw(st.lists(st.lists(st.sampled_from(arcs), min_size=1, max_size=3, unique=True),
                          min_size=0, max_size=5))
    vals = [Fraction(draw(st.integers(1, 6)), draw(st.integers(1, 3))) for _ in paths]
    g = Digraph(("s", "t"), tuple(Arc(a, "s", "t") for a in arcs))
    k = draw(st.integers(1, n_arcs))
    edges = draw(st.sets(st.tuples(st.sampled_from(arcs), st.sampled_from(arcs))
                         .filter(lambda p: p[0] != p[1]), max_size=8))
    return g, PathFlow(zip((tuple(p) for p in paths), vals)), k, CompatGraph(frozenset(edges))


@given(random_flows())
def test_worst_case_loss_matches_enumeration(data):
    g, flow, k, compat = data
    for mode, cg in ((EXACTLY_K, None), (AT_MOST_K, None), (AT_MOST_K, compat)):
        scen = enumerate_scenarios(g, k, mode, cg)
        expected, arg = max_loss(flow, scen)
        got, s = worst_case_loss(flow, g, k, mode, cg)
        assert got == expected
        assert s == arg
        assert loss(flow, s) == got


@given(random_flows())
def test_path_flow_arithmetic(data):
    _, flow, _, _ = data
    assert (flow + flow).value() == 2 * flow.value()
    assert flow.scaled(Fraction(1, 2)).arc_flows() == {a: v / 2 for a, v in flow.arc_flows().items()}
    assert sum(flow.arc_flows().values()) == sum(v * len(p) for p, v in flow.items())
    assert PathFlow(flow.items()) == flow


@given(random_flows(), st.data())
def test_loss_monotone_and_bounded(data, draw):
    g, flow, _, _ = data
    arcs = g.arc_ids
    small = draw.draw(st.sets(st.sampled_from(arcs)))
    big = small | draw.draw(st.sets(st.sampled_from(arcs)))
    assert loss(flow, small) <= loss(flow, big)
    bound = sum(arc_flow(flow, a) for a in big)
    separated = all(len(set(p.arcs) & big) <= 1 for p in flow)
    assert loss(flow, big) <= bound
    assert (loss(flow, big) == bound) == separated


@given(st.integers(3, 5), st.integers(1, 3))
def test_complete_compat_adds_no_restriction(n, k):
    g = parallel(n)
    complete = CompatGraph(frozenset(frozenset(p) for p in combinations(g.arc_ids, 2)))
    assert enumerate_scenarios(g, k, AT_MOST_K, complete) == enumerate_scenarios(g, k, AT_MOST_K)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_bundle_chain_path_count(sizes):
    nodes = tuple(f"v{i}" for i in range(len(sizes) + 1))
    arcs = tuple(Arc(f"b{i}.{j}", nodes[i], nodes[i + 1])
                 for i, size in enumerate(sizes) for j in range(size))
    paths = enumerate_st_paths(Digraph(nodes, arcs), nodes[0], nodes[-1])
    assert len(paths) == prod(sizes)
