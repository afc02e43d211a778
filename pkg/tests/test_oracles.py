from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from mrflab.errors import ResourceLimitError
from mrflab.instances import AT_MOST_K, Arc, Digraph, PathFlow, enumerate_st_paths, worst_case_loss
from mrflab.io import GeneratorSpec, generate
from mrflab.oracles import (UndirectedGraph, clique_interdiction_bruteforce, cliques_of_size,
                            fractional_chromatic_number, greedy_coloring_bound,
                            independent_sets, integral_unit_flow_families, max_clique)
from mrflab.reductions import reduce_clique_interdiction, reduce_coloring_to_mrfr
from mrflab.solvers import decide_integral_mrf_r_star


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return UndirectedGraph(range(10), outer + spokes + inner)


@pytest.mark.parametrize("graph,value", [
    (UndirectedGraph.complete(3), 3),
    (UndirectedGraph.cycle(5), Fraction(5, 2)),
    (UndirectedGraph.complete(4), 4),
    (UndirectedGraph.cycle(7), Fraction(7, 3)),
    (petersen(), Fraction(5, 2)),
    (UndirectedGraph(range(4), []), 1),
])
def test_known_fractional_chromatic_numbers(graph, value):
    chi, coloring = fractional_chromatic_number(graph)
    assert chi == value
    assert sum(coloring.values()) == value
    for v in graph.vertices:
        assert sum(w for s, w in coloring.items() if v in s) == 1


def test_clique_counts():
    assert len(cliques_of_size(UndirectedGraph.complete(4), 3)) == 4
    assert cliques_of_size(UndirectedGraph.cycle(5), 3) == []
    assert max_clique(UndirectedGraph.complete(4)) == 4


def test_clique_interdiction_small_cases():
    assert clique_interdiction_bruteforce(UndirectedGraph.complete(3), 3, 1) == (True, (1,))
    assert clique_interdiction_bruteforce(UndirectedGraph.path(4), 3, 0) == (True, ())
    assert clique_interdiction_bruteforce(UndirectedGraph.complete(4), 3, 1) == (False, None)
    assert clique_interdiction_bruteforce(UndirectedGraph.complete(4), 3, 2)[0]


def test_vertex_guard():
    with pytest.raises(ResourceLimitError):
        independent_sets(UndirectedGraph.complete(17))


def test_unit_flow_families():
    two = Digraph(("s", "t"), (Arc("a", "s", "t"), Arc("b", "s", "t")))
    assert list(integral_unit_flow_families(two, "s", "t", 2)) == [(("a",), ("b",))]
    assert list(integral_unit_flow_families(two, "s", "t", 3)) == []


def test_families_on_bundle_chain():
    inst = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3).instance
    fams = list(integral_unit_flow_families(inst.graph, inst.source, inst.sink, 3))
    paths = [p.arcs for p in enumerate_st_paths(inst.graph, inst.source, inst.sink)]
    direct = sum(1 for trio in combinations(paths, 3)
                 if len({a for p in trio for a in p}) == sum(len(p) for p in trio))
    assert len(fams) == direct == 36


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 7))
    pairs = list(combinations(range(n), 2))
    chosen = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return UndirectedGraph(range(n), [p for p, c in zip(pairs, chosen) if c])


@given(graphs())
def test_fractional_chromatic_bounds(g):
    chi, coloring = fractional_chromatic_number(g)
    alpha = max(len(s) for s in independent_sets(g))
    assert max(Fraction(len(g.vertices), alpha), max_clique(g)) <= chi <= greedy_coloring_bound(g)
    assert all(g.is_independent(s) for s in coloring)


@given(graphs(), st.integers(2, 4))
def test_interdiction_is_monotone_and_certified(g, size):
    prev = False
    for budget in range(len(g.vertices) + 1):
        ok, R = clique_interdiction_bruteforce(g, size, budget)
        assert ok >= prev
        prev = ok
        if ok:
            assert len(R) <= budget
            assert all(set(c) & set(R) for c in cliques_of_size(g, size))


def _family_decision(inst):
    for fam in integral_unit_flow_families(inst.graph, inst.source, inst.sink, inst.theta):
        flow = PathFlow((p, 1) for p in fam)
        worst, _ = worst_case_loss(flow, inst.graph, inst.k, AT_MOST_K, inst.compat)
        if worst <= inst.k - 1:
            return True
    return False


INTEGRAL_CASES = [reduce_clique_interdiction(g, 3, r).instance
                  for g, r in ((UndirectedGraph.complete(3), 1), (UndirectedGraph.path(3), 1),
                               (UndirectedGraph.complete(4), 1))]
INTEGRAL_CASES += [generate(GeneratorSpec(seed, "random_compat",
                                          {"n": 4, "arcs": 6, "k": 2, "theta": 2, "integral": True}))
                   for seed in range(12)]


@pytest.mark.parametrize("inst", INTEGRAL_CASES)
def test_integral_decision_matches_family_enumeration(inst):
    assert decide_integral_mrf_r_star(inst).answer == _family_decision(inst)
