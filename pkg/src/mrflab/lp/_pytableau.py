"""Pure-Python simplex tableau over :class:`fractions.Fraction`.

Same interface as the compiled ``_ctableau.Tableau``; used when the
extension is not built.  Rows are dense lists, the last column holds the
right-hand side.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

_ZERO = Fraction(0)


class Tableau:
    backend = "python"

    def __init__(self, rows: Sequence[Sequence[Fraction]]):
        if not rows:
            raise ValueError("tableau needs at least one row")
        width = len(rows[0])
        self._rows = []
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged tableau")
            self._rows.append([Fraction(v) for v in r])
        self._ncols = width

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return self._ncols

    def get(self, i: int, j: int) -> Fraction:
        return self._rows[i][j]

    def sign(self, i: int, j: int) -> int:
        v = self._rows[i][j]
        return (v > 0) - (v < 0)

    def row(self, i: int) -> list[Fraction]:
        return list(self._rows[i])

    def column(self, j: int) -> list[Fraction]:
        return [r[j] for r in self._rows]

    def append_row(self, values: Sequence[Fraction]) -> None:
        if len(values) != self._ncols:
            raise ValueError("row width mismatch")
        self._rows.append([Fraction(v) for v in values])

    def insert_column(self, j: int, values: Sequence[Fraction]) -> None:
        """Insert a column before index ``j`` (use ``ncols - 1`` to keep rhs last)."""
        if len(values) != len(self._rows):
            raise ValueError("column height mismatch")
        for r, v in zip(self._rows, values):
            r.insert(j, Fraction(v))
        self._ncols += 1

    def eliminate(self, r: int, basis: Sequence[int], first: int) -> None:
        """Zero the basic columns of row ``r`` using the rows that own them."""
        target = self._rows[r]
        for i in range(first, len(self._rows)):
            c = basis[i]
            if i == r or c < 0:
                continue
            f = target[c]
            if not f:
                continue
            for l, v in enumerate(self._rows[i]):
                if v:
                    target[l] -= f * v

    def pivot(self, i: int, j: int) -> None:
        rows = self._rows
        prow = rows[i]
        piv = prow[j]
        if not piv:
            raise ZeroDivisionError("pivot on zero entry")
        if piv != 1:
            inv = 1 / piv
            for l, v in enumerate(prow):
                if v:
                    prow[l] = v * inv
        nz = [(l, v) for l, v in enumerate(prow) if v]
        for k, r in enumerate(rows):
            if k == i:
                continue
            f = r[j]
            if not f:
                continue
            for l, v in nz:
                r[l] -= f * v

    def entering(self, r: int, allowed: bytes, bland: bool) -> int:
        """Column with negative entry in row ``r`` (most negative unless ``bland``)."""
        row = self._rows[r]
        best = -1
        best_val = _ZERO
        for j in range(self._ncols - 1):
            if not allowed[j]:
                continue
            v = row[j]
            if v < 0:
                if bland:
                    return j
                if best < 0 or v < best_val:
                    best, best_val = j, v
        return best

    def leaving(self, j: int, first: int, basis: Sequence[int]) -> int:
        """Minimum-ratio row among rows ``first..``; ties by smallest basic index."""
        rhs = self._ncols - 1
        best = -1
        best_num = best_den = _ZERO
        for i in range(first, len(self._rows)):
            row = self._rows[i]
            a = row[j]
            if a <= 0:
                continue
            b = row[rhs]
            if best < 0:
                best, best_num, best_den = i, b, a
                continue
            lhs = b * best_den
            rhs_v = best_num * a
            if lhs < rhs_v or (lhs == rhs_v and basis[i] < basis[best]):
                best, best_num, best_den = i, b, a
        return best

    def dual_leaving(self, first: int, basis: Sequence[int], bland: bool) -> int:
        """Row with negative right-hand side among rows ``first..``."""
        rhs = self._ncols - 1
        best = -1
        best_val = _ZERO
        for i in range(first, len(self._rows)):
            v = self._rows[i][rhs]
            if v < 0:
                if bland:
                    if best < 0 or basis[i] < basis[best]:
                        best = i
                elif best < 0 or v < best_val:
                    best, best_val = i, v
        return best

    def dual_entering(self, r: int, obj: int, allowed: bytes) -> int:
        """Dual ratio test: min d_j / -a_rj over a_rj < 0; ties by smallest j."""
        row = self._rows[r]
        orow = self._rows[obj]
        best = -1
        best_num = best_den = _ZERO
        for j in range(self._ncols - 1):
            if not allowed[j]:
                continue
            a = row[j]
            if a >= 0:
                continue
            d = orow[j]
            na = -a
            if best < 0 or d * best_den < best_num * na:
                best, best_num, best_den = j, d, na
        return best
