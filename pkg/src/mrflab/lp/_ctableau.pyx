# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""GMP-backed simplex tableau.

Entries are ``mpq_t`` values held in one heap array per row; the last
column is the right-hand side.  Interface mirrors ``_pytableau.Tableau``.
"""

from fractions import Fraction

from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memmove


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef struct __mpq_struct:
        pass
    ctypedef __mpz_struct *mpz_ptr
    ctypedef __mpq_struct *mpq_ptr
    ctypedef __mpq_struct mpq_t[1]

    void mpq_init(mpq_ptr)
    void mpq_clear(mpq_ptr)
    void mpq_set(mpq_ptr, mpq_ptr)
    void mpq_set_si(mpq_ptr, long, unsigned long)
    int mpq_set_str(mpq_ptr, const char *, int)
    void mpq_canonicalize(mpq_ptr)
    void mpq_mul(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_sub(mpq_ptr, mpq_ptr, mpq_ptr)
    void mpq_inv(mpq_ptr, mpq_ptr)
    void mpq_neg(mpq_ptr, mpq_ptr)
    int mpq_cmp(mpq_ptr, mpq_ptr)
    int mpq_sgn(mpq_ptr)
    int mpq_equal(mpq_ptr, mpq_ptr)
    mpz_ptr mpq_numref(mpq_ptr)
    mpz_ptr mpq_denref(mpq_ptr)
    size_t mpz_sizeinbase(mpz_ptr, int)
    char *mpz_get_str(char *, int, mpz_ptr)


cdef inline int _load(mpq_ptr dst, object value) except -1:
    cdef object f = value if isinstance(value, Fraction) else Fraction(value)
    cdef bytes s = ("%x/%x" % (f.numerator, f.denominator)).encode("ascii")
    if mpq_set_str(dst, s, 16) != 0:
        raise ValueError("cannot load rational %r" % (value,))
    mpq_canonicalize(dst)
    return 0


cdef object _dump(mpq_ptr src):
    cdef mpz_ptr num = mpq_numref(src)
    cdef mpz_ptr den = mpq_denref(src)
    cdef size_t n = mpz_sizeinbase(num, 16) + 2
    cdef size_t d = mpz_sizeinbase(den, 16) + 2
    cdef char *buf = <char *> malloc(n + d)
    if buf == NULL:
        raise MemoryError()
    try:
        mpz_get_str(buf, 16, num)
        p = int(buf.decode("ascii"), 16)
        mpz_get_str(buf, 16, den)
        q = int(buf.decode("ascii"), 16)
    finally:
        free(buf)
    return Fraction(p, q)


cdef class Tableau:
    cdef __mpq_struct **rows
    cdef int m          # rows in use
    cdef int n          # columns in use (rhs included)
    cdef int row_cap
    cdef int col_cap
    cdef int *nz
    cdef mpq_t tmp
    cdef mpq_t fac
    cdef mpq_t tmp2

    backend = "gmp"

    def __cinit__(self):
        self.rows = NULL
        self.nz = NULL
        self.m = 0
        self.n = 0
        self.row_cap = 0
        self.col_cap = 0
        mpq_init(self.tmp)
        mpq_init(self.fac)
        mpq_init(self.tmp2)

    def __init__(self, rows):
        rows = [list(r) for r in rows]
        if not rows:
            raise ValueError("tableau needs at least one row")
        width = len(rows[0])
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged tableau")
        self.col_cap = width + 16
        self.n = width
        self.nz = <int *> malloc(self.col_cap * sizeof(int))
        if self.nz == NULL:
            raise MemoryError()
        for r in rows:
            self._push_row(r)

    def __dealloc__(self):
        cdef int i, j
        if self.rows != NULL:
            for i in range(self.m):
                for j in range(self.col_cap):
                    mpq_clear(&self.rows[i][j])
                free(self.rows[i])
            free(self.rows)
        if self.nz != NULL:
            free(self.nz)
        mpq_clear(self.tmp)
        mpq_clear(self.fac)
        mpq_clear(self.tmp2)

    cdef int _push_row(self, list values) except -1:
        cdef int j
        cdef __mpq_struct *r
        if self.m == self.row_cap:
            newcap = self.row_cap * 2 + 8
            p = <__mpq_struct **> realloc(self.rows, newcap * sizeof(__mpq_struct *))
            if p == NULL:
                raise MemoryError()
            self.rows = p
            self.row_cap = newcap
        r = <__mpq_struct *> malloc(self.col_cap * sizeof(__mpq_struct))
        if r == NULL:
            raise MemoryError()
        for j in range(self.col_cap):
            mpq_init(&r[j])
        self.rows[self.m] = r
        self.m += 1
        for j in range(self.n):
            v = values[j]
            if v:
                _load(&r[j], v)
        return 0

    cdef int _grow_cols(self) except -1:
        cdef int i, j
        cdef int newcap = self.col_cap * 2 + 8
        cdef __mpq_struct *r
        for i in range(self.m):
            r = <__mpq_struct *> realloc(self.rows[i], newcap * sizeof(__mpq_struct))
            if r == NULL:
                raise MemoryError()
            for j in range(self.col_cap, newcap):
                mpq_init(&r[j])
            self.rows[i] = r
        nz = <int *> realloc(self.nz, newcap * sizeof(int))
        if nz == NULL:
            raise MemoryError()
        self.nz = nz
        self.col_cap = newcap
        return 0

    @property
    def nrows(self):
        return self.m

    @property
    def ncols(self):
        return self.n

    def get(self, int i, int j):
        self._check(i, j)
        return _dump(&self.rows[i][j])

    def sign(self, int i, int j):
        self._check(i, j)
        return mpq_sgn(&self.rows[i][j])

    def row(self, int i):
        self._check(i, 0)
        cdef int j
        return [_dump(&self.rows[i][j]) if mpq_sgn(&self.rows[i][j]) else Fraction(0)
                for j in range(self.n)]

    def column(self, int j):
        self._check(0, j)
        cdef int i
        return [_dump(&self.rows[i][j]) if mpq_sgn(&self.rows[i][j]) else Fraction(0)
                for i in range(self.m)]

    cdef int _check(self, int i, int j) except -1:
        if i < 0 or i >= self.m or j < 0 or j >= self.n:
            raise IndexError("tableau index out of range")
        return 0

    def append_row(self, values):
        values = list(values)
        if len(values) != self.n:
            raise ValueError("row width mismatch")
        self._push_row(values)

    def insert_column(self, int j, values):
        values = list(values)
        if len(values) != self.m:
            raise ValueError("column height mismatch")
        if j < 0 or j > self.n:
            raise IndexError("column index out of range")
        cdef int i
        cdef __mpq_struct saved
        if self.n == self.col_cap:
            self._grow_cols()
        for i in range(self.m):
            # the spare slot at index n is an initialised zero; rotate it into place
            saved = self.rows[i][self.n]
            memmove(&self.rows[i][j + 1], &self.rows[i][j],
                    (self.n - j) * sizeof(__mpq_struct))
            self.rows[i][j] = saved
            v = values[i]
            if v:
                _load(&self.rows[i][j], v)
        self.n += 1

    def eliminate(self, int r, basis, int first):
        self._check(r, 0)
        cdef __mpq_struct *target = self.rows[r]
        cdef __mpq_struct *src
        cdef int i, c, l
        for i in range(first, self.m):
            c = basis[i]
            if i == r or c < 0:
                continue
            if mpq_sgn(&target[c]) == 0:
                continue
            mpq_set(self.fac, &target[c])
            src = self.rows[i]
            for l in range(self.n):
                if mpq_sgn(&src[l]) != 0:
                    mpq_mul(self.tmp, self.fac, &src[l])
                    mpq_sub(&target[l], &target[l], self.tmp)

    def pivot(self, int i, int j):
        self._check(i, j)
        cdef __mpq_struct *prow = self.rows[i]
        cdef __mpq_struct *r
        cdef int l, k, cnt = 0, idx
        if mpq_sgn(&prow[j]) == 0:
            raise ZeroDivisionError("pivot on zero entry")
        mpq_inv(self.fac, &prow[j])
        for l in range(self.n):
            if mpq_sgn(&prow[l]) != 0:
                if l != j:
                    mpq_mul(&prow[l], &prow[l], self.fac)
                self.nz[cnt] = l
                cnt += 1
        mpq_set_si(&prow[j], 1, 1)
        for k in range(self.m):
            if k == i:
                continue
            r = self.rows[k]
            if mpq_sgn(&r[j]) == 0:
                continue
            mpq_set(self.fac, &r[j])
            for idx in range(cnt):
                l = self.nz[idx]
                mpq_mul(self.tmp, self.fac, &prow[l])
                mpq_sub(&r[l], &r[l], self.tmp)

    def entering(self, int r, const unsigned char[:] allowed, bint bland):
        self._check(r, 0)
        cdef __mpq_struct *row = self.rows[r]
        cdef int j, best = -1
        for j in range(self.n - 1):
            if not allowed[j]:
                continue
            if mpq_sgn(&row[j]) < 0:
                if bland:
                    return j
                if best < 0 or mpq_cmp(&row[j], &row[best]) < 0:
                    best = j
        return best

    def leaving(self, int j, int first, basis):
        self._check(0, j)
        cdef int i, best = -1, rhs = self.n - 1
        cdef __mpq_struct *row
        cdef int c
        for i in range(first, self.m):
            row = self.rows[i]
            if mpq_sgn(&row[j]) <= 0:
                continue
            if best < 0:
                best = i
                continue
            # compare b_i / a_ij with b_best / a_best,j via cross products
            mpq_mul(self.tmp, &row[rhs], &self.rows[best][j])
            mpq_mul(self.tmp2, &self.rows[best][rhs], &row[j])
            c = mpq_cmp(self.tmp, self.tmp2)
            if c < 0 or (c == 0 and basis[i] < basis[best]):
                best = i
        return best

    def dual_leaving(self, int first, basis, bint bland):
        cdef int i, best = -1, rhs = self.n - 1
        for i in range(first, self.m):
            if mpq_sgn(&self.rows[i][rhs]) < 0:
                if bland:
                    if best < 0 or basis[i] < basis[best]:
                        best = i
                elif best < 0 or mpq_cmp(&self.rows[i][rhs], &self.rows[best][rhs]) < 0:
                    best = i
        return best

    def dual_entering(self, int r, int obj, const unsigned char[:] allowed):
        self._check(r, 0)
        self._check(obj, 0)
        cdef __mpq_struct *row = self.rows[r]
        cdef __mpq_struct *orow = self.rows[obj]
        cdef int j, best = -1
        for j in range(self.n - 1):
            if not allowed[j]:
                continue
            if mpq_sgn(&row[j]) >= 0:
                continue
            if best < 0:
                best = j
                continue
            # d_j / -a_rj < d_b / -a_rb  <=>  d_j * a_rb > d_b * a_rj  (both a < 0)
            mpq_mul(self.tmp, &orow[j], &row[best])
            mpq_mul(self.tmp2, &orow[best], &row[j])
            if mpq_cmp(self.tmp, self.tmp2) > 0:
                best = j
        return best
