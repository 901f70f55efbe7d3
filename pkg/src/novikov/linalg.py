"""Exact sparse linear algebra over F_p, the p-local integers, and Q.

Three scalar rings are supported:

* ``FP(p)``      -- the field with p elements, elements stored as ints in [0, p)
* ``ZP(p)``      -- integers localized at p, stored as Fractions with p-free
                    denominators (exact arbitrary-precision arithmetic)
* ``QQ``         -- the rationals, used for intermediate structure computations

Matrices are sparse and column-major.  All pivot choices follow fixed
tie-break rules so that repeated runs produce byte-identical results.

The two workhorses are ``smith_normal_form`` (valid over any of the rings
above because each is local: the pivot of minimal p-valuation divides every
remaining entry, so a single clearing pass per pivot suffices) and
``subquotient_structure`` which presents a quotient lattice K/C as a direct
sum of free and p-power cyclic summands with explicit representatives.

A dedicated F_2 fast path stores vectors as int bitmasks and works by XOR
elimination; it is used for large mod-2 computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CompositionNotZero, NotInSpan, RingMismatch

INF = math.inf


def p_valuation(n: int, p: int) -> int:
    """Exponent of p in the integer n; raises on n == 0."""
    if n == 0:
        raise ZeroDivisionError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# scalar rings
# ---------------------------------------------------------------------------

class ScalarRing:
    """Interface shared by the exact coefficient rings."""

    is_field = False
    p: int | None = None

    zero = 0
    one = 1

    def coerce(self, x):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        """Exact division a/b; raises ValueError when b does not divide a."""
        raise NotImplementedError

    def val(self, a):
        """p-adic valuation; fields report 0 for nonzero, INF for zero."""
        raise NotImplementedError

    def p_power(self, k: int):
        raise NotImplementedError


class FpRing(ScalarRing):
    """The field with p elements; elements are ints in [0, p)."""

    is_field = True
    __slots__ = ("p",)

    def __init__(self, p: int):
        self.p = p

    def __eq__(self, other):
        return isinstance(other, FpRing) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def __repr__(self):
        return "F%d" % self.p

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingMismatch("cannot coerce bool")
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Fraction):
            den = x.denominator % self.p
            if den == 0:
                raise RingMismatch(
                    "denominator divisible by %d, no image in F%d" % (self.p, self.p))
            return (x.numerator % self.p) * pow(den, -1, self.p) % self.p
        raise RingMismatch("cannot coerce %r into F%d" % (x, self.p))

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F%d" % self.p)
        return pow(a, -1, self.p)

    def div(self, a, b):
        return a * self.inv(b) % self.p

    def val(self, a):
        return INF if a == 0 else 0

    def p_power(self, k):
        return 1 if k == 0 else 0


class ZpLocalRing(ScalarRing):
    """Integers localized at p: fractions whose denominator is p-free."""

    is_field = False
    __slots__ = ("p", "zero", "one")

    def __init__(self, p: int):
        self.p = p
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __eq__(self, other):
        return isinstance(other, ZpLocalRing) and other.p == self.p

    def __hash__(self):
        return hash(("Zp", self.p))

    def __repr__(self):
        return "Z(%d)" % self.p

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingMismatch("cannot coerce bool")
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise RingMismatch(
                "%s has denominator divisible by %d" % (x, self.p))
        return x

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0 and a.numerator % self.p != 0

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("%s is not a unit in Z(%d)" % (a, self.p))
        return 1 / a

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        q = a / b
        if q.denominator % self.p == 0:
            raise ValueError("%s does not divide %s in Z(%d)" % (b, a, self.p))
        return q

    def val(self, a):
        if a == 0:
            return INF
        v = p_valuation(a.numerator, self.p)
        # denominators are p-free by the ring invariant
        return v

    def p_power(self, k):
        return Fraction(self.p) ** k


class RationalRing(ScalarRing):
    """The field of rationals."""

    is_field = True
    p = None
    zero = Fraction(0)
    one = Fraction(1)

    def __eq__(self, other):
        return isinstance(other, RationalRing)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "Q"

    def coerce(self, x):
        if isinstance(x, bool):
            raise RingMismatch("cannot coerce bool")
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def is_unit(self, a):
        return a != 0

    def inv(self, a):
        return 1 / a

    def div(self, a, b):
        return a / b

    def val(self, a):
        return INF if a == 0 else 0

    def p_power(self, k):
        return Fraction(1) if k == 0 else Fraction(1)


_FP_CACHE: dict[int, FpRing] = {}
_ZP_CACHE: dict[int, ZpLocalRing] = {}


def FP(p: int) -> FpRing:
    if p not in _FP_CACHE:
        _FP_CACHE[p] = FpRing(p)
    return _FP_CACHE[p]


def ZP(p: int) -> ZpLocalRing:
    if p not in _ZP_CACHE:
        _ZP_CACHE[p] = ZpLocalRing(p)
    return _ZP_CACHE[p]


QQ = RationalRing()


# ---------------------------------------------------------------------------
# sparse vectors (dict index -> nonzero scalar)
# ---------------------------------------------------------------------------

def vec_add(ring, v, w):
    out = dict(v)
    for i, c in w.items():
        s = ring.add(out.get(i, ring.zero), c)
        if ring.is_zero(s):
            out.pop(i, None)
        else:
            out[i] = s
    return out


def vec_sub(ring, v, w):
    out = dict(v)
    for i, c in w.items():
        s = ring.sub(out.get(i, ring.zero), c)
        if ring.is_zero(s):
            out.pop(i, None)
        else:
            out[i] = s
    return out


def vec_scale(ring, c, v):
    if ring.is_zero(c):
        return {}
    return {i: ring.mul(c, x) for i, x in v.items()}


def vec_add_scaled(ring, v, c, w):
    """v + c*w as a new dict."""
    if ring.is_zero(c):
        return dict(v)
    out = dict(v)
    for i, x in w.items():
        s = ring.add(out.get(i, ring.zero), ring.mul(c, x))
        if ring.is_zero(s):
            out.pop(i, None)
        else:
            out[i] = s
    return out


def vec_iadd_scaled(ring, v, c, w):
    """In-place v += c*w."""
    if ring.is_zero(c):
        return v
    for i, x in w.items():
        s = ring.add(v.get(i, ring.zero), ring.mul(c, x))
        if ring.is_zero(s):
            v.pop(i, None)
        else:
            v[i] = s
    return v


def vec_from_dense(ring, xs):
    out = {}
    for i, x in enumerate(xs):
        c = ring.coerce(x)
        if not ring.is_zero(c):
            out[i] = c
    return out


def vec_to_dense(ring, v, n):
    out = [ring.zero] * n
    for i, c in v.items():
        out[i] = c
    return out


# ---------------------------------------------------------------------------
# sparse matrices, column-major
# ---------------------------------------------------------------------------

class Matrix:
    """Sparse matrix over a ScalarRing, stored as a list of column dicts."""

    __slots__ = ("ring", "nrows", "ncols", "cols")

    def __init__(self, ring, nrows, ncols, cols=None):
        self.ring = ring
        self.nrows = nrows
        self.ncols = ncols
        if cols is None:
            cols = [dict() for _ in range(ncols)]
        self.cols = cols

    @classmethod
    def zeros(cls, ring, nrows, ncols):
        return cls(ring, nrows, ncols)

    @classmethod
    def identity(cls, ring, n):
        return cls(ring, n, n, [{i: ring.one} for i in range(n)])

    @classmethod
    def from_cols(cls, ring, nrows, cols):
        clean = []
        for col in cols:
            d = {}
            for i, x in col.items():
                if not (0 <= i < nrows):
                    raise IndexError("row index %r out of range" % (i,))
                c = ring.coerce(x)
                if not ring.is_zero(c):
                    d[i] = c
            clean.append(d)
        return cls(ring, nrows, len(clean), clean)

    @classmethod
    def from_rows(cls, ring, rows, ncols=None):
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        cols = [dict() for _ in range(ncols)]
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                c = ring.coerce(x)
                if not ring.is_zero(c):
                    cols[j][i] = c
        return cls(ring, len(rows), ncols, cols)

    def get(self, i, j):
        return self.cols[j].get(i, self.ring.zero)

    def col(self, j):
        return self.cols[j]

    def set_entry(self, i, j, x):
        c = self.ring.coerce(x)
        if self.ring.is_zero(c):
            self.cols[j].pop(i, None)
        else:
            self.cols[j][i] = c

    def to_rows(self):
        out = [[self.ring.zero] * self.ncols for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, c in col.items():
                out[i][j] = c
        return out

    def copy(self):
        return Matrix(self.ring, self.nrows, self.ncols,
                      [dict(c) for c in self.cols])

    def mulvec(self, v):
        """Matrix times sparse column vector (dict over column indices)."""
        ring = self.ring
        out: dict = {}
        for j, c in v.items():
            vec_iadd_scaled(ring, out, c, self.cols[j])
        return out

    def mul(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring:
            raise RingMismatch("matrix product over different rings")
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch %dx%d * %dx%d" %
                             (self.nrows, self.ncols, other.nrows, other.ncols))
        cols = [self.mulvec(other.cols[j]) for j in range(other.ncols)]
        return Matrix(self.ring, self.nrows, other.ncols, cols)

    def transpose(self):
        cols = [dict() for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, c in col.items():
                cols[i][j] = c
        return Matrix(self.ring, self.ncols, self.nrows, cols)

    def submatrix_cols(self, indices):
        return Matrix(self.ring, self.nrows, len(indices),
                      [dict(self.cols[j]) for j in indices])

    def is_zero(self):
        return all(not col for col in self.cols)

    def nnz(self):
        return sum(len(col) for col in self.cols)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.ring == other.ring
                and self.nrows == other.nrows and self.ncols == other.ncols
                and self.cols == other.cols)

    def __repr__(self):
        return "Matrix(%r, %dx%d, nnz=%d)" % (
            self.ring, self.nrows, self.ncols, self.nnz())


def hstack(*mats: Matrix) -> Matrix:
    mats = [m for m in mats if m is not None]
    if not mats:
        raise ValueError("hstack of nothing")
    ring, nrows = mats[0].ring, mats[0].nrows
    cols = []
    for m in mats:
        if m.ring != ring or m.nrows != nrows:
            raise RingMismatch("hstack shape or ring mismatch")
        cols.extend(dict(c) for c in m.cols)
    return Matrix(ring, nrows, len(cols), cols)


def vstack(*mats: Matrix) -> Matrix:
    mats = [m for m in mats if m is not None]
    if not mats:
        raise ValueError("vstack of nothing")
    ring, ncols = mats[0].ring, mats[0].ncols
    total = sum(m.nrows for m in mats)
    cols = [dict() for _ in range(ncols)]
    off = 0
    for m in mats:
        if m.ring != ring or m.ncols != ncols:
            raise RingMismatch("vstack shape or ring mismatch")
        for j, col in enumerate(m.cols):
            for i, c in col.items():
                cols[j][i + off] = c
        off += m.nrows
    return Matrix(ring, total, ncols, cols)


def change_ring(mat: Matrix, ring) -> Matrix:
    """Coerce every entry into another ring (e.g. reduce Z(p) mod p)."""
    cols = []
    for col in mat.cols:
        d = {}
        for i, c in col.items():
            x = ring.coerce(c)
            if not ring.is_zero(x):
                d[i] = x
        cols.append(d)
    return Matrix(ring, mat.nrows, mat.ncols, cols)


# ---------------------------------------------------------------------------
# reduced row echelon form over a field
# ---------------------------------------------------------------------------

@dataclass
class Rref:
    """Reduced row echelon form: nonzero rows only, pivot entries equal 1."""
    ncols: int
    pivots: list          # pivot column index per echelon row, ascending
    rows: list            # row dicts, rows[k] has pivot at pivots[k]

    @property
    def rank(self):
        return len(self.pivots)


def rref(mat: Matrix) -> Rref:
    """Row reduce over a field.

    Pivot policy: leftmost unfinished column; among candidate rows the one
    whose current row has the fewest nonzero entries; ties go to the lowest
    original row index.  The end result is the canonical RREF regardless,
    but the policy keeps intermediate fill-in low and runs deterministic.
    """
    ring = mat.ring
    if not ring.is_field:
        raise RingMismatch("rref requires a field")
    work = []
    rows_tmp: dict[int, dict] = {}
    for j, col in enumerate(mat.cols):
        for i, c in col.items():
            rows_tmp.setdefault(i, {})[j] = c
    for i in sorted(rows_tmp):
        work.append((i, rows_tmp[i]))

    pivots = []
    done_rows = []
    for c in range(mat.ncols):
        best = None
        for k, (orig, row) in enumerate(work):
            if c in row:
                key = (len(row), orig)
                if best is None or key < best[0]:
                    best = (key, k)
        if best is None:
            continue
        k = best[1]
        orig, row = work.pop(k)
        # normalize pivot to 1
        inv = ring.inv(row[c])
        row = {j: ring.mul(inv, x) for j, x in row.items()}
        # eliminate column c from every other row, finished ones included
        for lst in (work, done_rows):
            for idx in range(len(lst)):
                tag, other = lst[idx]
                coeff = other.get(c)
                if coeff is None:
                    continue
                newrow = vec_add_scaled(ring, other, ring.neg(coeff), row)
                lst[idx] = (tag, newrow)
        pivots.append(c)
        done_rows.append((c, row))
    done_rows.sort(key=lambda t: t[0])
    return Rref(mat.ncols, [c for c, _ in done_rows], [r for _, r in done_rows])


def kernel_basis_field(mat: Matrix) -> list:
    """Kernel vectors over a field, one per free column, ascending."""
    ring = mat.ring
    red = rref(mat)
    pivot_set = set(red.pivots)
    out = []
    for f in range(mat.ncols):
        if f in pivot_set:
            continue
        v = {f: ring.one}
        for pc, row in zip(red.pivots, red.rows):
            coeff = row.get(f)
            if coeff is not None:
                v[pc] = ring.neg(coeff)
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Smith normal form over a local ring
# ---------------------------------------------------------------------------

@dataclass
class SmithResult:
    ring: ScalarRing
    nrows: int
    ncols: int
    divisors: list       # length min(nrows, ncols); p-powers then zeros
    rank: int
    U: Matrix            # nrows x nrows
    U_inv: Matrix        # nrows x nrows
    V: Matrix            # ncols x ncols;  U * A * V = diag(divisors)


def smith_normal_form(A: Matrix) -> SmithResult:
    """Diagonalize over F_p, Z(p) or Q.

    Each ring here is local with principal maximal ideal (p) (or is a
    field), so the entry of minimal p-valuation divides all others and a
    single row pass plus a single column pass clears its row and column
    for good.  Divisors come out as exact p-powers in nondecreasing
    valuation order, followed by zeros.
    """
    ring = A.ring
    m, n = A.nrows, A.ncols
    rows: list[dict] = [dict() for _ in range(m)]
    for j, colj in enumerate(A.cols):
        for i, c in colj.items():
            rows[i][j] = c

    U_rows: list[dict] = [{i: ring.one} for i in range(m)]
    Uinv_cols: list[dict] = [{i: ring.one} for i in range(m)]
    V_cols: list[dict] = [{j: ring.one} for j in range(n)]

    k = min(m, n)
    divisors = []
    for t in range(k):
        # pivot: minimal valuation in the active block, first by (i, j)
        best = None
        for i in range(t, m):
            row = rows[i]
            if not row:
                continue
            for j in sorted(row):
                if j < t:
                    continue
                w = ring.val(row[j])
                if best is None or w < best[0]:
                    best = (w, i, j)
                    if w == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pi, pj = best

        if pi != t:
            rows[pi], rows[t] = rows[t], rows[pi]
            U_rows[pi], U_rows[t] = U_rows[t], U_rows[pi]
            Uinv_cols[pi], Uinv_cols[t] = Uinv_cols[t], Uinv_cols[pi]
        if pj != t:
            for row in rows:
                a = row.pop(t, None)
                b = row.pop(pj, None)
                if b is not None:
                    row[t] = b
                if a is not None:
                    row[pj] = a
            V_cols[pj], V_cols[t] = V_cols[t], V_cols[pj]

        piv = rows[t][t]
        w = ring.val(piv)
        target = ring.p_power(w) if not ring.is_field else ring.one
        if piv != target:
            u = ring.div(target, piv)       # a unit
            rows[t] = {j: ring.mul(u, x) for j, x in rows[t].items()}
            U_rows[t] = {j: ring.mul(u, x) for j, x in U_rows[t].items()}
            uinv = ring.inv(u)
            Uinv_cols[t] = {i: ring.mul(uinv, x) for i, x in Uinv_cols[t].items()}
            piv = rows[t][t]

        # clear the pivot column with row operations
        for i in range(m):
            if i == t:
                continue
            a = rows[i].get(t)
            if a is None:
                continue
            q = ring.div(a, piv)
            vec_iadd_scaled(ring, rows[i], ring.neg(q), rows[t])
            vec_iadd_scaled(ring, U_rows[i], ring.neg(q), U_rows[t])
            vec_iadd_scaled(ring, Uinv_cols[t], q, Uinv_cols[i])

        # clear the pivot row with column operations; the pivot column now
        # only holds the pivot itself, so only row t changes
        for j in list(rows[t]):
            if j == t:
                continue
            q = ring.div(rows[t][j], piv)
            del rows[t][j]
            vec_iadd_scaled(ring, V_cols[j], ring.neg(q), V_cols[t])

        divisors.append(piv)

    while len(divisors) < k:
        divisors.append(ring.zero)
    rank = sum(1 for d in divisors if not ring.is_zero(d))

    U_cols: list[dict] = [dict() for _ in range(m)]
    for i, row in enumerate(U_rows):
        for j, c in row.items():
            U_cols[j][i] = c
    U = Matrix(ring, m, m, U_cols)
    U_inv = Matrix(ring, m, m, Uinv_cols)
    V = Matrix(ring, n, n, V_cols)
    return SmithResult(ring, m, n, divisors, rank, U, U_inv, V)


def kernel_basis(mat: Matrix) -> list:
    """Kernel generators as column dicts.

    Over Z(p) these come from the invertible column transform of the Smith
    form, hence span the kernel saturatedly (they form part of a basis of
    the ambient lattice).
    """
    if mat.ring.is_field:
        return kernel_basis_field(mat)
    snf = smith_normal_form(mat)
    return [dict(snf.V.cols[j]) for j in range(snf.rank, mat.ncols)]


class LinearSolver:
    """Repeated exact solves A x = b against a fixed A via one Smith form."""

    def __init__(self, A: Matrix):
        self.A = A
        self.snf = smith_normal_form(A)

    def solve(self, b: dict):
        """A solution dict, or None when none exists over the ring."""
        ring = self.A.ring
        snf = self.snf
        c = snf.U.mulvec(b)
        z = {}
        klen = len(snf.divisors)
        for i, ci in c.items():
            if i >= klen:
                return None
            d = snf.divisors[i]
            if ring.is_zero(d):
                return None
            if ring.val(ci) < ring.val(d):
                return None
            z[i] = ring.div(ci, d)
        return snf.V.mulvec(z)


def solve(A: Matrix, b: dict):
    return LinearSolver(A).solve(b)


def solve_many(A: Matrix, B: Matrix):
    """Solve A X = B columnwise; None if any column has no solution."""
    slv = LinearSolver(A)
    cols = []
    for j in range(B.ncols):
        x = slv.solve(B.cols[j])
        if x is None:
            return None
        cols.append(x)
    return Matrix(A.ring, A.ncols, B.ncols, cols)


def matrix_rank(mat: Matrix) -> int:
    if mat.ring.is_field:
        return rref(mat).rank
    return smith_normal_form(mat).rank


# ---------------------------------------------------------------------------
# subquotient structure
# ---------------------------------------------------------------------------

@dataclass
class QuotientStructure:
    """K/C as a sum of cyclic pieces, with ambient representatives.

    ``free_reps[i]`` generates an infinite cyclic (or, over a field,
    one-dimensional) summand; ``torsion_reps[i]`` generates a summand of
    order ``torsion[i]`` (an integer p-power).  ``class_coordinates``
    rewrites any vector of K in these generators.
    """
    ring: ScalarRing
    ambient_dim: int
    free_rank: int
    torsion: list                 # ints p^k, k >= 1, nondecreasing
    free_reps: list               # ambient vectors (dicts)
    torsion_reps: list            # ambient vectors (dicts)
    _B: Matrix = field(repr=False, default=None)
    _solver: LinearSolver = field(repr=False, default=None)
    _U: Matrix = field(repr=False, default=None)
    _free_idx: list = field(repr=False, default=None)
    _tors_idx: list = field(repr=False, default=None)
    _tors_div: list = field(repr=False, default=None)

    @property
    def mod_p_dim(self):
        """Dimension of (K/C) tensor F_p."""
        return self.free_rank + len(self.torsion)

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def class_coordinates(self, v: dict):
        """Coordinates of the class of v: (free list, torsion residue list).

        Torsion residues are canonical ints in [0, p^k).  Raises NotInSpan
        when v does not lie in the span of K's generators.
        """
        ring = self.ring
        x = self._solver.solve(v)
        if x is None:
            raise NotInSpan("vector is not in the subgroup")
        y = self._U.mulvec(x)
        free = [y.get(i, ring.zero) for i in self._free_idx]
        tors = []
        for i, d in zip(self._tors_idx, self._tors_div):
            c = y.get(i, ring.zero)
            tors.append(_residue_mod(ring, c, d))
        return free, tors

    def is_zero_class(self, v: dict) -> bool:
        free, tors = self.class_coordinates(v)
        return (all(self.ring.is_zero(c) for c in free)
                and all(t == 0 for t in tors))


def _residue_mod(ring, c, modulus: int) -> int:
    """Canonical residue of a ring element modulo an integer p-power."""
    if isinstance(c, int):
        return c % modulus
    num, den = c.numerator, c.denominator
    return num * pow(den, -1, modulus) % modulus


def _as_int(ring, d) -> int:
    """Convert a p-power divisor to a plain int."""
    if isinstance(d, int):
        return d
    if isinstance(d, Fraction):
        if d.denominator != 1:
            raise ValueError("divisor %s is not an integer" % (d,))
        return d.numerator
    raise ValueError("unexpected divisor %r" % (d,))


def subquotient_structure(B: Matrix, C: Matrix) -> QuotientStructure:
    """Structure of span(B) / span(C); C's columns must lie in span(B)."""
    ring = B.ring
    if C.ring != ring or C.nrows != B.nrows:
        raise RingMismatch("subquotient pieces over different ambients")
    a = B.ncols
    solver = LinearSolver(B)
    ycols = []
    for j in range(C.ncols):
        y = solver.solve(C.cols[j])
        if y is None:
            raise NotInSpan("subgroup generator %d outside the span" % j)
        ycols.append(y)
    Y = Matrix(ring, a, C.ncols, ycols)
    syz = kernel_basis(B)
    S = Matrix(ring, a, len(syz), syz)
    M = hstack(Y, S) if (Y.ncols or S.ncols) else Matrix.zeros(ring, a, 0)
    snf = smith_normal_form(M)

    d_eff = list(snf.divisors) + [ring.zero] * (a - len(snf.divisors))
    free_idx, tors_idx, tors_div = [], [], []
    for i in range(a):
        d = d_eff[i]
        if ring.is_zero(d):
            free_idx.append(i)
        elif ring.is_unit(d):
            continue
        else:
            tors_idx.append(i)
            tors_div.append(_as_int(ring, d))

    free_reps = [B.mulvec(snf.U_inv.cols[i]) for i in free_idx]
    tors_reps = [B.mulvec(snf.U_inv.cols[i]) for i in tors_idx]
    return QuotientStructure(
        ring=ring, ambient_dim=B.nrows,
        free_rank=len(free_idx), torsion=list(tors_div),
        free_reps=free_reps, torsion_reps=tors_reps,
        _B=B, _solver=solver, _U=snf.U,
        _free_idx=free_idx, _tors_idx=tors_idx, _tors_div=tors_div)


def cohomology_at(din, dout, ring=None, dim_here=None) -> QuotientStructure:
    """Homology ker(dout)/im(din) of a three-term complex of free modules.

    ``din`` maps into the middle term (its row count is the middle
    dimension), ``dout`` maps out of it.  Either may be None; when both
    are, pass ``ring`` and ``dim_here`` explicitly.  Raises
    CompositionNotZero when dout * din != 0.
    """
    if ring is None:
        if din is None and dout is None:
            raise ValueError("ring required when both maps are None")
        ring = (dout if dout is not None else din).ring
    if dim_here is None:
        if dout is not None:
            dim_here = dout.ncols
        elif din is not None:
            dim_here = din.nrows
        else:
            raise ValueError("dim_here required when both maps are None")
    if din is None:
        din = Matrix.zeros(ring, dim_here, 0)
    if dout is None:
        dout = Matrix.zeros(ring, 0, dim_here)
    if din.nrows != dim_here or dout.ncols != dim_here:
        raise ValueError("differentials do not meet in the middle term")
    comp = dout.mul(din)
    if not comp.is_zero():
        raise CompositionNotZero("d o d != 0 at the requested spot")
    zcols = kernel_basis(dout)
    Z = Matrix(ring, dim_here, len(zcols), zcols)
    return subquotient_structure(Z, din)


def presented_cohomology_at(ring, dim_here, din, dout, rel_here, rel_next
                            ) -> QuotientStructure:
    """Cohomology of a complex of presented modules at the middle spot.

    The middle term is R^dim_here / im(rel_here); ``dout`` maps it to a
    term presented with relations ``rel_next``.  Cycles are vectors whose
    image under dout lies in im(rel_next); boundaries are im(din) together
    with im(rel_here).  All matrices may be None for zero.
    """
    if din is None:
        din = Matrix.zeros(ring, dim_here, 0)
    if rel_here is None:
        rel_here = Matrix.zeros(ring, dim_here, 0)
    if dout is None:
        dout = Matrix.zeros(ring, 0, dim_here)
    if rel_next is None:
        rel_next = Matrix.zeros(ring, dout.nrows, 0)
    stacked = hstack(dout, rel_next)
    kern = kernel_basis(stacked)
    zcols = []
    for v in kern:
        proj = {i: c for i, c in v.items() if i < dim_here}
        zcols.append(proj)
    Z = Matrix(ring, dim_here, len(zcols), zcols)
    boundaries = hstack(din, rel_here)
    try:
        return subquotient_structure(Z, boundaries)
    except NotInSpan as exc:
        raise CompositionNotZero(
            "differential does not descend to the presented complex: %s" % exc)


# ---------------------------------------------------------------------------
# lattice helpers over Z(p)
# ---------------------------------------------------------------------------

def lattice_intersection(A: Matrix, B: Matrix) -> Matrix:
    """Generators of span(A) meet span(B) inside the ambient lattice."""
    if A.ring != B.ring or A.nrows != B.nrows:
        raise RingMismatch("intersection of lattices in different ambients")
    both = hstack(A, B)
    kern = kernel_basis(both)
    cols = []
    for v in kern:
        u = {i: c for i, c in v.items() if i < A.ncols}
        cols.append(A.mulvec(u))
    return Matrix(A.ring, A.nrows, len(cols), cols)


def lattice_contains(A: Matrix, v: dict) -> bool:
    return solve(A, v) is not None


def graded_piece_dim(M_w: Matrix, M_w1: Matrix) -> int:
    """dim over F_p of M_w / M_w1 for nested lattices with p*M_w in M_w1."""
    structure = subquotient_structure(M_w, M_w1)
    if structure.free_rank:
        raise ValueError("quotient of the nested lattices is not torsion")
    p = M_w.ring.p
    for t in structure.torsion:
        if t != p:
            raise ValueError("quotient has a factor of order %d, not %d" % (t, p))
    return len(structure.torsion)


# ---------------------------------------------------------------------------
# F_2 bitmask fast path
# ---------------------------------------------------------------------------

def f2_mask_from_vec(v: dict) -> int:
    m = 0
    for i, c in v.items():
        if c % 2:
            m |= 1 << i
    return m


def f2_vec_from_mask(mask: int) -> dict:
    out = {}
    i = 0
    while mask:
        if mask & 1:
            out[i] = 1
        mask >>= 1
        i += 1
    return out


def f2_cols_of(mat: Matrix) -> list:
    return [f2_mask_from_vec(c) for c in mat.cols]


def f2_echelon(cols):
    """Column echelon over F_2 by XOR elimination.

    Returns (pivots, kernel): pivots maps a leading bit to the echelon
    column holding it; kernel lists combination masks over the original
    column indices for each dependent column.
    """
    pivots = {}
    kernel = []
    for j, v in enumerate(cols):
        combo = 1 << j
        while v:
            lead = v & -v
            hit = pivots.get(lead)
            if hit is None:
                pivots[lead] = (v, combo)
                break
            v ^= hit[0]
            combo ^= hit[1]
        else:
            kernel.append(combo)
    return pivots, kernel


def f2_rank(cols) -> int:
    pivots, _ = f2_echelon(cols)
    return len(pivots)


def f2_kernel(cols) -> list:
    _, kernel = f2_echelon(cols)
    return kernel


def f2_compose_is_zero(din_cols, dout_cols) -> bool:
    """Whether dout o din = 0 for bitmask column lists."""
    for v in din_cols:
        acc = 0
        m = v
        while m:
            lead = m & -m
            acc ^= dout_cols[lead.bit_length() - 1]
            m ^= lead
        if acc:
            return False
    return True


class F2Quotient:
    """span(Z)/span(B) over F_2 with bitmask representatives.

    Duck-compatible with QuotientStructure for the fields used downstream:
    free_rank, torsion (empty), free_reps, class_coordinates,
    is_zero_class, mod_p_dim.
    """

    __slots__ = ("ring", "ambient_dim", "_img_piv", "_rep_piv", "reps",
                 "free_reps", "torsion", "torsion_reps")

    def __init__(self, ambient_dim, z_cols, b_cols):
        self.ring = FP(2)
        self.ambient_dim = ambient_dim
        img_piv, _ = f2_echelon(b_cols)
        self._img_piv = {lead: vec for lead, (vec, _) in img_piv.items()}
        self._rep_piv = {}
        self.reps = []
        for z in z_cols:
            v = z
            while v:
                lead = v & -v
                if lead in self._img_piv:
                    v ^= self._img_piv[lead]
                elif lead in self._rep_piv:
                    v ^= self._rep_piv[lead][0]
                else:
                    self._rep_piv[lead] = (v, len(self.reps))
                    self.reps.append(v)
                    break
            # fully reduced to zero: dependent cycle, contributes nothing
        self.free_reps = [f2_vec_from_mask(r) for r in self.reps]
        self.torsion = []
        self.torsion_reps = []

    @property
    def free_rank(self):
        return len(self.reps)

    @property
    def mod_p_dim(self):
        return len(self.reps)

    @property
    def is_trivial(self):
        return not self.reps

    def class_mask(self, v: int) -> int:
        """Coordinates of the class of bitmask v as a mask over rep indices."""
        out = 0
        while v:
            lead = v & -v
            if lead in self._img_piv:
                v ^= self._img_piv[lead]
            elif lead in self._rep_piv:
                vec, idx = self._rep_piv[lead]
                v ^= vec
                out ^= 1 << idx
            else:
                raise NotInSpan("bitmask vector outside the cycle span")
        return out

    def class_coordinates(self, v: dict):
        mask = self.class_mask(f2_mask_from_vec(v))
        free = [(mask >> i) & 1 for i in range(len(self.reps))]
        return free, []

    def is_zero_class(self, v: dict) -> bool:
        return self.class_mask(f2_mask_from_vec(v)) == 0


def f2_cohomology(din_cols, dout_cols, dim_here) -> F2Quotient:
    """ker(dout)/im(din) over F_2, all data as bitmask column lists.

    ``dout_cols`` must have one mask per basis vector of the middle term;
    pass None (not []) for a missing outgoing map.
    """
    din_cols = din_cols or []
    if dout_cols is None:
        cycles = [1 << i for i in range(dim_here)]
    else:
        if len(dout_cols) != dim_here:
            raise ValueError("outgoing map has %d columns, expected %d"
                             % (len(dout_cols), dim_here))
        if not f2_compose_is_zero(din_cols, dout_cols):
            raise CompositionNotZero("d o d != 0 over F_2")
        cycles = f2_kernel(dout_cols)
    return F2Quotient(dim_here, cycles, din_cols)


def f2_presented_cohomology(dim_here, din_cols, dout_cols,
                            rel_here_cols, rel_next_cols) -> F2Quotient:
    """Cohomology over F_2 of a complex with relation spans quotiented out.

    Cycles are vectors whose image under dout lies in the span of
    rel_next; boundaries are im(din) plus the span of rel_here.  Pass
    dout_cols=None for a missing outgoing map (then everything cycles).
    """
    din_cols = din_cols or []
    rel_here_cols = rel_here_cols or []
    rel_next_cols = rel_next_cols or []
    if dout_cols is None:
        cycles = [1 << i for i in range(dim_here)]
    else:
        if len(dout_cols) != dim_here:
            raise ValueError("outgoing map has %d columns, expected %d"
                             % (len(dout_cols), dim_here))
        stacked = list(dout_cols) + list(rel_next_cols)
        combos = f2_kernel(stacked)
        keep = (1 << dim_here) - 1
        cycles = [c & keep for c in combos]
    return F2Quotient(dim_here, cycles, list(din_cols) + list(rel_here_cols))
