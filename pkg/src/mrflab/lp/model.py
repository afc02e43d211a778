"""Linear program description, solutions, and certificate checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping

from ..errors import ValidationError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELATIONS = {"<=": "<=", "=": "==", "==": "==", ">=": ">="}


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValidationError(f"float {value!r} is not an exact rational")
    return Fraction(value)


@dataclass(frozen=True)
class Constraint:
    name: Hashable
    coeffs: Mapping[Hashable, Fraction]
    relation: str
    rhs: Fraction

    def activity(self, x: Mapping[Hashable, Fraction]) -> Fraction:
        return sum((a * x.get(v, 0) for v, a in self.coeffs.items()), Fraction(0))

    def satisfied(self, x: Mapping[Hashable, Fraction]) -> bool:
        lhs = self.activity(x)
        if self.relation == "<=":
            return lhs <= self.rhs
        if self.relation == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


class LinearProgram:
    """Variables with bounds, a linear objective and linear constraints.

    Bounds default to ``[0, inf)``; pass ``None`` for an infinite side.
    """

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValidationError(f"unknown objective sense {sense!r}")
        self.sense = sense
        self.bounds: dict[Hashable, tuple[Fraction | None, Fraction | None]] = {}
        self.objective: dict[Hashable, Fraction] = {}
        self.constraints: list[Constraint] = []
        self._constraint_names: set = set()

    def add_variable(self, name: Hashable, lower=0, upper=None) -> Hashable:
        if name in self.bounds:
            raise ValidationError(f"duplicate variable {name!r}")
        lo = None if lower is None else as_fraction(lower)
        hi = None if upper is None else as_fraction(upper)
        self.bounds[name] = (lo, hi)
        return name

    def set_objective(self, coeffs: Mapping[Hashable, object], sense: str | None = None) -> None:
        if sense is not None:
            if sense not in ("max", "min"):
                raise ValidationError(f"unknown objective sense {sense!r}")
            self.sense = sense
        self.objective = {v: as_fraction(c) for v, c in coeffs.items() if c}

    def add_constraint(self, coeffs: Mapping[Hashable, object], relation: str, rhs,
                       name: Hashable | None = None) -> Hashable:
        rel = _RELATIONS.get(relation)
        if rel is None:
            raise ValidationError(f"unknown relation {relation!r}")
        if name is None:
            name = len(self.constraints)
        if name in self._constraint_names:
            raise ValidationError(f"duplicate constraint name {name!r}")
        self._constraint_names.add(name)
        cs = {v: as_fraction(c) for v, c in coeffs.items() if c}
        self.constraints.append(Constraint(name, cs, rel, as_fraction(rhs)))
        return name

    @property
    def variables(self) -> list[Hashable]:
        return list(self.bounds)

    def validate(self) -> None:
        for v in self.objective:
            if v not in self.bounds:
                raise ValidationError(f"objective references undeclared variable {v!r}", "objective")
        for c in self.constraints:
            for v in c.coeffs:
                if v not in self.bounds:
                    raise ValidationError(f"undeclared variable {v!r}", f"constraint {c.name!r}")

    def objective_value(self, x: Mapping[Hashable, Fraction]) -> Fraction:
        return sum((c * x.get(v, 0) for v, c in self.objective.items()), Fraction(0))

    def dump(self) -> str:
        """Human-readable listing (objective, constraints, bounds)."""
        def term_list(coeffs):
            parts = []
            for v, c in coeffs.items():
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                parts.append(f"{sign} {'' if mag == 1 else str(mag) + ' '}{v}")
            if not parts:
                return "0"
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        lines = [f"{self.sense}imize", f"  obj: {term_list(self.objective)}", "subject to"]
        for c in self.constraints:
            lines.append(f"  {c.name}: {term_list(c.coeffs)} {c.relation} {c.rhs}")
        lines.append("bounds")
        for v, (lo, hi) in self.bounds.items():
            lo_s = "-inf" if lo is None else str(lo)
            hi_s = "+inf" if hi is None else str(hi)
            lines.append(f"  {lo_s} <= {v} <= {hi_s}")
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    """Result of a solve.

    ``dual`` holds multipliers ``y`` per constraint name such that
    ``c - A^T y`` is covered by the variable bounds; when optimal the
    resulting dual bound equals ``value``.  For infeasible programs
    ``farkas`` holds multipliers proving it, for unbounded ones ``ray``
    holds an improving direction from ``primal``.
    """

    status: str
    value: Fraction | None
    primal: dict = field(default_factory=dict)
    dual: dict = field(default_factory=dict)
    farkas: dict | None = None
    ray: dict | None = None
    pivots: int = 0


def _reduced_costs(lp: LinearProgram, c: Mapping, y: Mapping) -> dict:
    r = {v: Fraction(c.get(v, 0)) for v in lp.bounds}
    for con in lp.constraints:
        yi = y.get(con.name, 0)
        if yi:
            for v, a in con.coeffs.items():
                r[v] -= a * yi
    return r


def _dual_bound(lp: LinearProgram, c: Mapping, y: Mapping, sense: str) -> tuple[Fraction | None, str | None]:
    """Dual objective for multipliers ``y``; ``None`` plus a reason if ``y`` is not dual feasible."""
    total = Fraction(0)
    for con in lp.constraints:
        yi = Fraction(y.get(con.name, 0))
        if yi == 0:
            continue
        upper_side = (con.relation == "<=") == (sense == "max")
        if con.relation != "==" and ((yi < 0) if upper_side else (yi > 0)):
            return None, f"multiplier of {con.name!r} has wrong sign"
        total += yi * con.rhs
    for v, rv in _reduced_costs(lp, c, y).items():
        if rv == 0:
            continue
        lo, hi = lp.bounds[v]
        use_upper = (rv > 0) == (sense == "max")
        bound = hi if use_upper else lo
        if bound is None:
            return None, f"reduced cost of {v!r} is not covered by a finite bound"
        total += rv * bound
    return total, None


def primal_violations(lp: LinearProgram, x: Mapping) -> list[str]:
    out = []
    for v, (lo, hi) in lp.bounds.items():
        xv = x.get(v, 0)
        if lo is not None and xv < lo:
            out.append(f"{v!r} below lower bound")
        if hi is not None and xv > hi:
            out.append(f"{v!r} above upper bound")
    for con in lp.constraints:
        if not con.satisfied(x):
            out.append(f"constraint {con.name!r} violated")
    return out


def verify_solution(lp: LinearProgram, sol: LpSolution) -> list[str]:
    """Independent exact check of the certificate carried by ``sol``.

    Returns a list of problems; empty means the certificate is valid.
    """
    if sol.status == OPTIMAL:
        problems = primal_violations(lp, sol.primal)
        if lp.objective_value(sol.primal) != sol.value:
            problems.append("reported value differs from primal objective")
        bound, why = _dual_bound(lp, lp.objective, sol.dual, lp.sense)
        if bound is None:
            problems.append(why)
        elif bound != sol.value:
            problems.append(f"dual bound {bound} differs from value {sol.value}")
        return problems
    if sol.status == INFEASIBLE:
        if sol.farkas is None:
            return ["no infeasibility certificate"]
        bound, why = _dual_bound(lp, {}, sol.farkas, "max")
        if bound is None:
            return [why]
        return [] if bound < 0 else ["farkas multipliers do not prove infeasibility"]
    if sol.status == UNBOUNDED:
        problems = primal_violations(lp, sol.primal)
        ray = sol.ray or {}
        for v, (lo, hi) in lp.bounds.items():
            d = ray.get(v, 0)
            if (lo is not None and d < 0) or (hi is not None and d > 0):
                problems.append(f"ray leaves the bounds of {v!r}")
        for con in lp.constraints:
            act = con.activity(ray)
            if (con.relation == "<=" and act > 0) or (con.relation == ">=" and act < 0) \
                    or (con.relation == "==" and act != 0):
                problems.append(f"ray leaves constraint {con.name!r}")
        gain = lp.objective_value(ray)
        if (gain <= 0) if lp.sense == "max" else (gain >= 0):
            problems.append("ray does not improve the objective")
        return problems
    return [f"unknown status {sol.status!r}"]
