from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, strategies as st

from mrflab.errors import ResourceLimitError, ValidationError
from mrflab.instances import (EXACTLY_K, Arc, Commodity, Digraph, MrfInstance, MrfMInstance,
                              PathFlow, enumerate_st_paths, interdictable_arcs, loss,
                              witness_problems, worst_case_loss)
from mrflab.lp import OPTIMAL, LinearProgram, solve_lp
from mrflab.oracles import UndirectedGraph
from mrflab.reductions import reduce_coloring_to_mrfr
from mrflab.solvers import (Limits, best_response, decide_mrf_m_star, decide_mrf_r_star,
                            decide_mrf_star, decide_rni_star, rni_violations, solve_integral_mrf,
                            solve_mrf, solve_mrf_k1, solve_rni)

from corpora import mrf_corpus, with_capacities


def parallel(n, k):
    g = Digraph(("s", "t"), tuple(Arc(f"a{i}", "s", "t") for i in range(1, n + 1)))
    return MrfInstance(g, "s", "t", k)


def single_arc():
    return MrfInstance(Digraph(("s", "t"), (Arc("a", "s", "t"),)), "s", "t", 1)


def diamond():
    g = Digraph(("s", "u", "v", "t"), (Arc("a", "s", "u"), Arc("b", "s", "v"),
                                       Arc("c", "u", "t"), Arc("d", "v", "t")))
    return MrfInstance(g, "s", "t", 1)


def explicit_value(inst):
    """Robust value from the full path-by-scenario program, no row generation."""
    g = inst.graph
    paths = enumerate_st_paths(g, inst.source, inst.sink)
    lp = LinearProgram("max")
    for i in range(len(paths)):
        lp.add_variable(i)
    lp.add_variable("lam", 0, None)
    for a in g.arcs:
        lp.add_constraint({i: 1 for i, p in enumerate(paths) if a.id in p}, "<=", a.capacity)
    for s in combinations(interdictable_arcs(g), inst.k):
        row = {i: 1 for i, p in enumerate(paths) if not set(s).isdisjoint(p.arcs)}
        row["lam"] = -1
        lp.add_constraint(row, "<=", 0)
    lp.set_objective({**{i: 1 for i in range(len(paths))}, "lam": -1})
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    return sol.value


def integral_bruteforce(inst):
    g = inst.graph
    paths = enumerate_st_paths(g, inst.source, inst.sink)
    caps = [int(min(g.capacity(a) for a in p.arcs)) for p in paths]
    best = Fraction(0)
    for amounts in product(*(range(c + 1) for c in caps)):
        flow = PathFlow((p, v) for p, v in zip(paths, amounts) if v)
        if any(v > g.capacity(a) for a, v in flow.arc_flows().items()):
            continue
        worst, _ = worst_case_loss(flow, g, inst.k, EXACTLY_K)
        best = max(best, flow.value() - worst)
    return best


def test_small_values():
    assert solve_mrf(single_arc()).value == 0
    assert solve_mrf(parallel(2, 1)).value == 1
    assert solve_mrf_k1(single_arc()) == 0
    assert solve_mrf_k1(parallel(2, 1)) == 1
    assert solve_integral_mrf(single_arc()).value == 0
    assert solve_integral_mrf(parallel(2, 1)).value == 1


@pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 6) for k in range(1, n + 1)])
def test_parallel_unit_arcs(n, k):
    assert solve_mrf(parallel(n, k)).value == n - k


def test_rni_on_parallel_arcs_is_uniform():
    sol = solve_rni(parallel(2, 1))
    assert sol.value == 1
    assert sol.z == {frozenset({"a1"}): Fraction(1, 2), frozenset({"a2"}): Fraction(1, 2)}
    assert rni_violations(parallel(2, 1), sol) == []
    assert solve_rni(single_arc()).value == 0


def test_decisions_on_parallel_arcs():
    inst = parallel(2, 1)
    assert decide_mrf_star(inst, 1).answer
    assert not decide_rni_star(inst, 1).answer
    assert not decide_mrf_star(inst, Fraction(3, 2)).answer


def test_diamond_matches_k1_formulation():
    assert solve_mrf(diamond()).value == solve_mrf_k1(diamond()) == explicit_value(diamond())


def test_best_response_and_zero_flow():
    scen, value = best_response(PathFlow(), parallel(2, 1).graph, 1)
    assert (scen, value) == (frozenset({"a1"}), 0)
    scen, value = best_response(PathFlow({("a1",): 1, ("a2",): 1}), parallel(2, 1).graph, 1)
    assert value == 1


def test_budget_above_interdictable_arcs():
    with pytest.raises(ValidationError):
        solve_mrf(parallel(2, 3))


def test_path_limit():
    art = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3)
    inst = MrfInstance(art.instance.graph, art.instance.source, art.instance.sink, 2)
    with pytest.raises(ResourceLimitError):
        solve_mrf(inst, Limits(paths=5), symmetry=False)


def test_coloring_decisions():
    yes = reduce_coloring_to_mrfr(UndirectedGraph.complete(3), 3).instance
    no = reduce_coloring_to_mrfr(UndirectedGraph.cycle(5), 2).instance
    d = decide_mrf_r_star(yes)
    assert d.answer and witness_problems(yes, d.witness) == []
    assert not decide_mrf_r_star(no).answer
    assert decide_mrf_r_star(type(yes)(yes.graph, yes.source, yes.sink, yes.k, yes.compat, 0)).answer


def test_multicommodity_demand_infeasible():
    g = Digraph(("s", "t"), (Arc("a", "s", "t", 2), Arc("b", "s", "t", 2)))
    inst = MrfMInstance(g, 1, (Commodity("c", "s", "t", 5),), "c")
    d = decide_mrf_m_star(inst)
    assert not d.answer and d.info["reason"] == "demand infeasible"


CORPUS = mrf_corpus(30)


@pytest.mark.parametrize("idx", range(0, 30, 3))
def test_symmetry_and_explicit_program_agree(idx):
    inst = CORPUS[idx]
    value = explicit_value(inst)
    assert solve_mrf(inst, symmetry=True).value == value
    sol = solve_mrf(inst, symmetry=False)
    assert sol.value == value
    assert sol.flow.value() - worst_case_loss(sol.flow, inst.graph, inst.k)[0] == value


@pytest.mark.parametrize("idx", range(1, 30, 5))
def test_integral_matches_bruteforce(idx):
    inst = CORPUS[idx]
    assert solve_integral_mrf(inst).value == integral_bruteforce(inst)


@given(st.integers(0, 29), st.lists(st.sampled_from([Fraction(1, 2), 1, 2, 3]), min_size=8,
                                    max_size=8))
def test_strong_duality_with_capacities(idx, caps):
    inst = with_capacities(CORPUS[idx], caps)
    mrf = solve_mrf(inst)
    rni = solve_rni(inst)
    assert mrf.value == rni.value == explicit_value(inst)
    assert rni_violations(inst, rni) == []
    worst, s = worst_case_loss(mrf.flow, inst.graph, inst.k)
    assert loss(mrf.flow, s) == worst == mrf.worst_loss
