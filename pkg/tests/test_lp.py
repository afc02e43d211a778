from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from mrflab.errors import ValidationError
from mrflab.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, available_backends,
                       solve_lp, verify_solution)

BACKENDS = available_backends()


def _solve_square(rows, rhs):
    """Gaussian elimination over the rationals; None when singular."""
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col] / m[col][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def vertex_oracle(names, objective, constraints, upper):
    """Best objective over basic feasible points of a box-bounded program, or None."""
    n = len(names)
    rows = []
    for coeffs, rel, rhs in constraints:
        rows.append(([Fraction(coeffs.get(v, 0)) for v in names], Fraction(rhs)))
    for i in range(n):
        unit = [Fraction(int(i == j)) for j in range(n)]
        rows.append((unit, Fraction(0)))
        rows.append((unit, Fraction(upper)))

    def feasible(x):
        if any(xi < 0 or xi > upper for xi in x):
            return False
        for coeffs, rel, rhs in constraints:
            lhs = sum(Fraction(coeffs.get(v, 0)) * xi for v, xi in zip(names, x))
            if rel == "<=" and lhs > rhs or rel == ">=" and lhs < rhs or rel == "=" and lhs != rhs:
                return False
        return True

    best = None
    for pick in combinations(rows, n):
        x = _solve_square([r for r, _ in pick], [b for _, b in pick])
        if x is None or not feasible(x):
            continue
        val = sum(Fraction(objective.get(v, 0)) * xi for v, xi in zip(names, x))
        best = val if best is None else max(best, val)
    return best


def _lp(names, objective, constraints, upper=None, sense="max"):
    lp = LinearProgram(sense)
    for v in names:
        lp.add_variable(v, 0, upper)
    lp.set_objective(objective)
    for coeffs, rel, rhs in constraints:
        lp.add_constraint(coeffs, rel, rhs)
    return lp


@pytest.mark.parametrize("backend", BACKENDS)
def test_single_bound(backend):
    lp = _lp(["x"], {"x": 1}, [({"x": 1}, "<=", 3)])
    sol = solve_lp(lp, backend)
    assert sol.status == OPTIMAL and sol.value == 3
    assert verify_solution(lp, sol) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_dual_forced_to_one(backend):
    lp = LinearProgram("max")
    lp.add_variable("x")
    lp.add_variable("y")
    lp.set_objective({"x": 1, "y": 1})
    lp.add_constraint({"x": 1, "y": 1}, "<=", 1, name="cap")
    sol = solve_lp(lp, backend)
    assert sol.value == 1 and sol.dual["cap"] == 1
    assert verify_solution(lp, sol) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_textbook_program_and_duals(backend):
    lp = LinearProgram("max")
    lp.add_variable("x")
    lp.add_variable("y")
    lp.set_objective({"x": 3, "y": 5})
    lp.add_constraint({"x": 1}, "<=", 4, name="r1")
    lp.add_constraint({"y": 2}, "<=", 12, name="r2")
    lp.add_constraint({"x": 3, "y": 2}, "<=", 18, name="r3")
    sol = solve_lp(lp, backend)
    assert sol.value == 36
    assert sol.primal == {"x": 2, "y": 6}
    assert [sol.dual.get(r, 0) for r in ("r1", "r2", "r3")] == [0, Fraction(3, 2), 1]
    assert verify_solution(lp, sol) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_has_farkas_certificate(backend):
    lp = LinearProgram("min")
    lp.add_variable("x", 0, None)
    lp.set_objective({})
    lp.add_constraint({"x": 1}, ">=", 1)
    lp.add_constraint({"x": 1}, "<=", 0)
    sol = solve_lp(lp, backend)
    assert sol.status == INFEASIBLE
    assert sol.farkas
    assert verify_solution(lp, sol) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded_has_ray(backend):
    lp = _lp(["x", "y"], {"x": 1}, [({"x": 1, "y": -1}, "<=", 2)])
    sol = solve_lp(lp, backend)
    assert sol.status == UNBOUNDED
    assert sol.ray
    assert verify_solution(lp, sol) == []


def test_tampered_certificate_is_caught():
    lp = _lp(["x"], {"x": 1}, [({"x": 1}, "<=", 3)])
    sol = solve_lp(lp)
    bad = type(sol)(sol.status, sol.value + 1, sol.primal, sol.dual)
    assert verify_solution(lp, bad)


def test_floats_rejected():
    lp = LinearProgram()
    with pytest.raises(ValidationError):
        lp.add_variable("x", 0, 0.5)


def test_dump_lists_everything():
    lp = _lp(["x", "y"], {"x": 2, "y": -1}, [({"x": 1, "y": 1}, "<=", Fraction(1, 2))])
    text = lp.dump()
    assert text.startswith("maximize")
    assert "2 x - y" in text and "<= 1/2" in text and text.endswith("end\n")


coef = st.integers(-3, 3)
relation = st.sampled_from(["<=", ">=", "="])


@st.composite
def small_programs(draw):
    n = draw(st.integers(1, 3))
    names = [f"x{i}" for i in range(n)]
    objective = {v: draw(coef) for v in names}
    constraints = []
    for _ in range(draw(st.integers(0, 4))):
        coeffs = {v: draw(coef) for v in names}
        rhs = Fraction(draw(st.integers(-4, 8)), draw(st.integers(1, 3)))
        constraints.append((coeffs, draw(relation), rhs))
    upper = draw(st.integers(1, 5))
    return names, objective, constraints, upper


@given(small_programs())
def test_matches_vertex_enumeration(prog):
    names, objective, constraints, upper = prog
    expected = vertex_oracle(names, objective, constraints, upper)
    lp = _lp(names, objective, constraints, upper)
    for backend in BACKENDS:
        sol = solve_lp(lp, backend)
        assert verify_solution(lp, sol) == []
        if expected is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL and sol.value == expected


@given(small_programs())
def test_minimisation_is_negated_maximisation(prog):
    names, objective, constraints, upper = prog
    mx = solve_lp(_lp(names, objective, constraints, upper))
    neg = {v: -c for v, c in objective.items()}
    mn = solve_lp(_lp(names, neg, constraints, upper, sense="min"))
    assert mx.status == mn.status
    if mx.status == OPTIMAL:
        assert mn.value == -mx.value
