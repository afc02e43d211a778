"""Two-phase tableau simplex over exact rationals, with dual re-optimisation.

Row 0 of the tableau carries the phase-2 reduced costs, row 1 the
phase-1 ones; constraint rows follow.  Entering columns are picked by
largest violation until a run of degenerate pivots is seen, after which
Bland's rule takes over until the objective moves again.  Every row keeps
the column of its initial identity (slack or artificial), which is where
the dual multipliers are read from.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping

from ..errors import ResourceLimitError, ValidationError
from .backend import tableau_class
from .model import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, as_fraction

FIRST = 2                 # index of the first constraint row
DEGENERATE_STREAK = 16    # switch to Bland after this many stalled pivots
DEFAULT_PIVOT_LIMIT = 1_000_000


class SimplexEngine:
    """Tableau for one program; supports appending ``<=``/``>=`` rows after a solve."""

    def __init__(self, lp: LinearProgram, backend: str | None = None,
                 pivot_limit: int = DEFAULT_PIVOT_LIMIT):
        lp.validate()
        self.lp = lp
        self.pivot_limit = pivot_limit
        self.pivots = 0
        self._sense = 1 if lp.sense == "max" else -1
        self._status: str | None = None
        self._unbounded_col = -1
        self._infeasible_row = -1

        # column map: x_v = offset_v + sum(sign * column)
        self._var_cols: dict[Hashable, list[tuple[int, int]]] = {}
        self._offset: dict[Hashable, Fraction] = {}
        n = 0
        rows: list[tuple[dict[int, Fraction], str, Fraction, Hashable]] = []
        bound_rows = []
        for v, (lo, hi) in lp.bounds.items():
            if lo is not None:
                self._var_cols[v] = [(n, 1)]
                self._offset[v] = lo
                if hi is not None:
                    bound_rows.append(({n: Fraction(1)}, "<=", hi - lo, None))
                n += 1
            elif hi is not None:
                self._var_cols[v] = [(n, -1)]
                self._offset[v] = hi
                n += 1
            else:
                self._var_cols[v] = [(n, 1), (n + 1, -1)]
                self._offset[v] = Fraction(0)
                n += 2
        self._structural = set(range(n))
        self._objective = dict(lp.objective)
        for con in lp.constraints:
            cols, rhs = self._to_columns(con.coeffs, con.rhs)
            rows.append((cols, con.relation, rhs, con.name))
        rows.extend(bound_rows)

        flips = []
        kinds = []
        for idx, (cols, rel, rhs, name) in enumerate(rows):
            flip = 1
            if rhs < 0:
                flip = -1
                cols = {c: -a for c, a in cols.items()}
                rhs = -rhs
                rel = {"<=": ">=", ">=": "<=", "==": "=="}[rel]
            rows[idx] = (cols, rel, rhs, name)
            flips.append(flip)
            kinds.append(rel)
        nslack = sum(1 for r in kinds if r != "==")
        nart = sum(1 for r in kinds if r != "<=")
        width = n + nslack + nart + 1
        rhs_col = width - 1
        data = [[0] * width, [0] * width]
        basis = [-1, -1]
        unit_cols = []
        art_cols = []
        next_slack, next_art = n, n + nslack
        for (cols, rel, rhs, _name), _flip in zip(rows, flips):
            line = [0] * width
            for c, a in cols.items():
                line[c] = a
            line[rhs_col] = rhs
            if rel == "<=":
                line[next_slack] = 1
                basis.append(next_slack)
                unit_cols.append(next_slack)
                next_slack += 1
            else:
                if rel == ">=":
                    line[next_slack] = -1
                    next_slack += 1
                line[next_art] = 1
                basis.append(next_art)
                unit_cols.append(next_art)
                art_cols.append(next_art)
                next_art += 1
                for j in range(width):
                    if j != next_art - 1 and line[j]:
                        data[1][j] -= line[j]
            data.append(line)
        for v, c in lp.objective.items():
            for col, s in self._var_cols[v]:
                data[0][col] -= self._sense * s * c

        self.T = tableau_class(backend)(data)
        self.basis = basis
        self._unit_cols = unit_cols
        self._flips = flips
        self._row_names = [name for (_c, _r, _b, name) in rows]
        self._row_index = {name: i for i, name in enumerate(self._row_names) if name is not None}
        self._art_rows = [i for i, c in enumerate(unit_cols) if c in set(art_cols)]
        self._nuser = len(lp.constraints)
        self._is_art = set(art_cols)
        self.allowed = bytearray(1 if j < width - 1 and j not in self._is_art else 0
                                 for j in range(width - 1))
        self._has_phase1 = bool(art_cols)
        self._extra: list[Hashable] = []

    # -- helpers ---------------------------------------------------------
    def _to_columns(self, coeffs: Mapping, rhs) -> tuple[dict[int, Fraction], Fraction]:
        rhs = as_fraction(rhs)
        cols: dict[int, Fraction] = {}
        for v, a in coeffs.items():
            a = as_fraction(a)
            if not a:
                continue
            if v not in self._var_cols:
                raise ValidationError(f"undeclared variable {v!r}")
            rhs -= a * self._offset[v]
            for c, s in self._var_cols[v]:
                cols[c] = cols.get(c, 0) + s * a
        return {c: a for c, a in cols.items() if a}, rhs

    def _pivot(self, i: int, j: int) -> None:
        self.T.pivot(i, j)
        self.basis[i] = j
        self.pivots += 1
        if self.pivots > self.pivot_limit:
            raise ResourceLimitError("simplex pivots", self.pivot_limit)

    def _primal_loop(self, obj_row: int) -> int:
        """Returns -1 at optimality, else the entering column of an unbounded ray."""
        T = self.T
        streak = 0
        while True:
            j = T.entering(obj_row, self.allowed, streak >= DEGENERATE_STREAK)
            if j < 0:
                return -1
            i = T.leaving(j, FIRST, self.basis)
            if i < 0:
                return j
            stalled = T.sign(i, T.ncols - 1) == 0
            self._pivot(i, j)
            streak = streak + 1 if stalled else 0

    def _dual_loop(self) -> int:
        """Returns -1 when primal feasible again, else a row proving infeasibility."""
        T = self.T
        streak = 0
        while True:
            r = T.dual_leaving(FIRST, self.basis, streak >= DEGENERATE_STREAK)
            if r < 0:
                return -1
            j = T.dual_entering(r, 0, self.allowed)
            if j < 0:
                return r
            stalled = T.sign(0, j) == 0
            self._pivot(r, j)
            streak = streak + 1 if stalled else 0

    def _drive_out_artificials(self) -> None:
        T = self.T
        for i in range(FIRST, T.nrows):
            if self.basis[i] not in self._is_art:
                continue
            for j in range(T.ncols - 1):
                if self.allowed[j] and T.sign(i, j) != 0:
                    self._pivot(i, j)
                    break

    # -- public ----------------------------------------------------------
    def solve(self) -> LpSolution:
        if self._has_phase1:
            self._primal_loop(1)
            if self.T.sign(1, self.T.ncols - 1) < 0:
                self._status = INFEASIBLE
                return self.solution()
            self._drive_out_artificials()
            self._has_phase1 = False
        col = self._primal_loop(0)
        if col >= 0:
            self._status = UNBOUNDED
            self._unbounded_col = col
        else:
            self._status = OPTIMAL
        return self.solution()

    def add_constraint(self, coeffs: Mapping, relation: str, rhs, name: Hashable | None = None) -> None:
        """Append a cut to an optimal tableau; call :meth:`reoptimize` afterwards."""
        if self._status != OPTIMAL:
            raise ValidationError("constraints can only be added to an optimal tableau")
        if relation not in ("<=", ">="):
            raise ValidationError("only inequality rows can be appended")
        cols, b = self._to_columns(coeffs, rhs)
        flip = 1
        if relation == ">=":
            flip = -1
            cols = {c: -a for c, a in cols.items()}
            b = -b
        T = self.T
        line = [0] * T.ncols
        for c, a in cols.items():
            line[c] = a
        line[-1] = b
        T.append_row(line)
        self.basis.append(-1)
        r = T.nrows - 1
        T.eliminate(r, self.basis, FIRST)
        slack = T.ncols - 1
        col = [0] * T.nrows
        col[r] = 1
        T.insert_column(slack, col)
        self.basis[r] = slack
        self.allowed.append(1)
        self._unit_cols.append(slack)
        self._flips.append(flip)
        self._row_names.append(name)
        if name is not None:
            self._row_index[name] = len(self._row_names) - 1
        self._extra.append(name)

    def add_column(self, name: Hashable, coeffs: Mapping, cost=0) -> None:
        """Append a variable in ``[0, inf)`` to an optimal tableau; call :meth:`resume` afterwards.

        ``coeffs`` maps constraint names (including appended cuts) to the
        new variable's coefficient in that row.
        """
        if self._status != OPTIMAL:
            raise ValidationError("columns can only be added to an optimal tableau")
        if name in self._var_cols:
            raise ValidationError(f"duplicate variable {name!r}")
        stored = {}
        for row, a in coeffs.items():
            a = as_fraction(a)
            if not a:
                continue
            idx = self._row_index.get(row)
            if idx is None:
                raise ValidationError(f"unknown constraint {row!r}")
            stored[idx] = a * self._flips[idx]
        T = self.T
        col = [Fraction(0)] * T.nrows
        for r in range(T.nrows):
            total = Fraction(0)
            for idx, a in stored.items():
                b = T.get(r, self._unit_cols[idx])
                if b:
                    total += b * a
            col[r] = total
        cost = as_fraction(cost)
        col[0] -= self._sense * cost
        col[1] -= sum((stored.get(idx, 0) for idx in self._art_rows), Fraction(0))
        j = T.ncols - 1
        T.insert_column(j, col)
        self.allowed.append(1)
        self._structural.add(j)
        self._var_cols[name] = [(j, 1)]
        self._offset[name] = Fraction(0)
        if cost:
            self._objective[name] = cost

    def resume(self) -> LpSolution:
        """Primal re-optimisation after columns were added."""
        col = self._primal_loop(0)
        if col >= 0:
            self._status = UNBOUNDED
            self._unbounded_col = col
        else:
            self._status = OPTIMAL
        return self.solution()

    def reoptimize(self) -> LpSolution:
        r = self._dual_loop()
        if r >= 0:
            self._status = INFEASIBLE
            self._infeasible_row = r
        else:
            self._status = OPTIMAL
        return self.solution()

    def column_values(self) -> dict[int, Fraction]:
        T = self.T
        rhs = T.ncols - 1
        out = {}
        for i in range(FIRST, T.nrows):
            c = self.basis[i]
            if c in self._structural:
                v = T.get(i, rhs)
                if v:
                    out[c] = v
        return out

    def primal(self) -> dict[Hashable, Fraction]:
        vals = self.column_values()
        x = {}
        for v, cols in self._var_cols.items():
            x[v] = self._offset[v] + sum((s * vals.get(c, 0) for c, s in cols), Fraction(0))
        return x

    def _row_multipliers(self, source) -> dict[Hashable, Fraction]:
        y = {}
        for idx, name in enumerate(self._row_names):
            if name is None:
                continue
            yi = source(idx) * self._flips[idx]
            if yi:
                y[name] = yi
        return y

    def solution(self) -> LpSolution:
        T = self.T
        if self._status == INFEASIBLE:
            if self._infeasible_row >= 0:
                r = self._infeasible_row
                farkas = self._row_multipliers(lambda idx: T.get(r, self._unit_cols[idx]))
            else:
                def phase1(idx):
                    c = self._unit_cols[idx]
                    return T.get(1, c) - (1 if c in self._is_art else 0)
                farkas = self._row_multipliers(phase1)
            return LpSolution(INFEASIBLE, None, {}, {}, farkas=farkas, pivots=self.pivots)
        x = self.primal()
        value = sum((c * x.get(v, 0) for v, c in self._objective.items()), Fraction(0))
        if self._status == UNBOUNDED:
            j = self._unbounded_col
            dirs = {j: Fraction(1)}
            for i in range(FIRST, T.nrows):
                a = T.get(i, j)
                if a:
                    dirs[self.basis[i]] = -a
            ray = {}
            for v, cols in self._var_cols.items():
                d = sum((s * dirs.get(c, 0) for c, s in cols), Fraction(0))
                if d:
                    ray[v] = d
            return LpSolution(UNBOUNDED, None, x, {}, ray=ray, pivots=self.pivots)
        dual = self._row_multipliers(lambda idx: self._sense * T.get(0, self._unit_cols[idx]))
        return LpSolution(OPTIMAL, value, x, dual, pivots=self.pivots)


def solve_lp(lp: LinearProgram, backend: str | None = None,
             pivot_limit: int = DEFAULT_PIVOT_LIMIT) -> LpSolution:
    """Solve ``lp`` exactly; the result carries a verifiable certificate."""
    return SimplexEngine(lp, backend, pivot_limit).solve()
