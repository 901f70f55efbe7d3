"""Dense modular linear algebra for the large spectral blocks.

Exact Fraction arithmetic is hopeless on blocks with thousands of basis
words, but every question the page machinery asks lives at tiny
p-valuations.  Every routine here mirrors a fraction-free elimination
over the p-local integers whose only divisions are by p-local units or
by the p-power part of an accepted pivot, and such a computation
commutes with reduction mod p^K as long as readouts stay far from K.

The precision book-keeping is explicit.  Entries are always reductions
of honest p-local numbers; the error is semantic: a kernel extracted
mod p^K only annihilates its matrix up to a defect of valuation K
minus that elimination's pivot-valuation sum, and every later division
by a non-unit pivot pulls the defect lower.  The cumulative pull along
a derivation chain is tracked as ``depth``, so anything at or above
the moving floor K - depth is junk and counts as zero.  Zero-tests
(membership residuals, class coordinates) read directly at the floor,
relying on honest magnitudes staying far below it.  Readouts that feed
divisions or rank and order decisions are stricter: an honest pivot or
elementary divisor must sit at valuation at most ``hcap``, and a
valuation in the gap between hcap and the floor raises PrecisionLoss
rather than guessing.  Fresh matrices have depth 0 and the floor K: an
elimination over junk-free input zeroes nothing and is exact mod p^K.

Vectors cross the boundary as sparse dicts with int or Fraction
entries; internally everything is a dense int64 array of canonical
residues in [0, p^K).  Pivots are chosen by minimal valuation with
fixed positional tie-breaks, so repeated runs are byte-identical.
"""

import math

import numpy as np

__all__ = ["PrecisionLoss", "PK", "Echelon", "PKQuotient",
           "col_echelon", "smith_uinv", "subquotient_pk"]


class PrecisionLoss(Exception):
    """A valuation readout fell between honest content and junk."""


# pairwise products need 2 * 29 bits; the remaining int64 headroom sets
# the matmul chunk width, so larger K only means smaller chunks
_INT64_BITS = 63
_RESIDUE_BITS = 29


def _default_kexp(p):
    return max(2, int(_RESIDUE_BITS // math.log2(p)))


class PK:
    """Arithmetic context for Z/p^K as a computational stand-in for Z_(p)."""

    __slots__ = ("p", "kexp", "mod", "hcap")

    def __init__(self, p, kexp=None, hcap=None):
        p = int(p)
        if p < 2:
            raise ValueError("p must be a prime")
        if kexp is None:
            kexp = _default_kexp(p)
        self.p = p
        self.kexp = int(kexp)
        self.mod = p ** self.kexp
        if hcap is None:
            hcap = max(3, min(8, self.kexp // 3))
        self.hcap = int(hcap)
        if self.kexp - 2 * self.hcap < 2:
            raise ValueError("no usable gap between honest valuations and "
                             "quotient junk at K = %d" % self.kexp)

    def bump(self):
        """Context accepting deeper honest valuations, or None at the top.

        K is already pinned at the int64 ceiling, so a retry widens the
        honest cap instead, narrowing the junk gap it trades against.
        """
        h2 = self.hcap + 2
        if self.kexp - 2 * h2 < 2:
            return None
        return PK(self.p, self.kexp, h2)

    def residue(self, x):
        num = getattr(x, "numerator", None)
        if num is None:
            return int(x) % self.mod
        den = x.denominator % self.mod
        return num % self.mod * pow(den, -1, self.mod) % self.mod

    def to_dense(self, nrows, cols):
        """Dense int64 matrix from a list of sparse column dicts."""
        A = np.zeros((int(nrows), len(cols)), dtype=np.int64)
        for j, col in enumerate(cols):
            for i, c in col.items():
                A[i, j] = self.residue(c)
        return A

    def to_sparse(self, vec):
        return {int(i): int(c) for i, c in enumerate(vec) if c}

    def val_of(self, x):
        """Valuation of a residue, or None when zero mod p^K."""
        x = int(x) % self.mod
        if x == 0:
            return None
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def floor(self, depth, where=""):
        """Junk floor after the given division depth.

        Junk is born at valuation K less the pivot sum of the kernel
        extraction that created it, and each later division by p^v pulls
        it down v more; ``depth`` accumulates both along the derivation
        chain, so everything at or above K - depth is junk.
        """
        f = self.kexp - depth
        if f <= self.hcap:
            raise PrecisionLoss("division depth %d exhausted the precision "
                                "gap%s" % (depth, " at " + where if where
                                           else ""))
        return f

    def classify(self, v, depth, where=""):
        """Honest valuation, or None for zero-or-junk; raises in the gap."""
        if v is None:
            return None
        if v >= self.floor(depth, where):
            return None
        if v > self.hcap:
            raise PrecisionLoss(
                "valuation %d%s sits between the honest cap %d and the "
                "junk floor" % (v, " at " + where if where else "",
                                self.hcap))
        return v

    def split_zero(self, X, depth, where=""):
        """Boolean mask of entries that are zero or junk.

        A pure zero-test: junk never sinks below the floor, so anything
        under it is honest and nonzero.  Honest values may legitimately
        exceed hcap here (products add valuations); the hcap alarm only
        guards readouts that feed divisions.
        """
        f = self.floor(depth, where)
        return X % (self.p ** f) == 0

    def matmul(self, A, B):
        """A @ B mod p^K, chunked so int64 accumulation cannot overflow."""
        inner = A.shape[1]
        step = 1 << max(1, _INT64_BITS - 2 * (self.mod - 1).bit_length())
        if inner <= step:
            return A @ B % self.mod
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(0, inner, step):
            out = (out + A[:, k:k + step] @ B[k:k + step, :]) % self.mod
        return out


def _find_pivot(A, ctx, k, floor):
    """Minimal-valuation entry of A[:, k:] as (val, row, col), or None.

    Scans valuations from 0 up to the junk floor; within one valuation
    the smallest column wins, then the smallest row.  Entries at or
    above the floor are quotient junk and never pivot.
    """
    block = A[:, k:]
    if block.size == 0 or not block.any():
        return None
    q = ctx.p
    for v in range(min(floor, ctx.kexp)):
        hits = block % q
        nz = hits.any(axis=0)
        cols = np.nonzero(nz)[0]
        if cols.size:
            c = int(cols[0])
            r = int(np.nonzero(hits[:, c])[0][0])
            return (v, r, k + c)
        q *= ctx.p
    return None


class Echelon:
    """Column echelon A @ T = E over Z/p^K with unimodular column ops.

    ``pivots`` lists (row, val) in elimination order; E[:, j] has its
    pivot entry exactly p^val in that row, with the row cleared in all
    later columns.  Columns past the rank carry only junk, and when
    tracked their T-columns generate the kernel up to a defect below
    the floor.  ``sigma`` is this elimination's pivot-valuation sum and
    ``depth`` is the input depth plus sigma, the depth at which results
    of this echelon should be read.
    """

    __slots__ = ("ctx", "E", "T", "pivots", "rank", "sigma", "depth")

    def __init__(self, A, ctx, track=False, depth=0):
        A = A.copy() % ctx.mod
        m, n = A.shape
        T = np.eye(n, dtype=np.int64) if track else None
        pivots = []
        d = depth
        k = 0
        while k < n:
            hit = _find_pivot(A, ctx, k, ctx.floor(d, "echelon"))
            if hit is None:
                break
            v, r, c = hit
            ctx.classify(v, d, "echelon pivot")
            if c != k:
                A[:, [k, c]] = A[:, [c, k]]
                if track:
                    T[:, [k, c]] = T[:, [c, k]]
            piv = int(A[r, k])
            unit = piv // (ctx.p ** v)
            if unit != 1:
                w = pow(unit, -1, ctx.mod)
                A[:, k] = A[:, k] * w % ctx.mod
                if track:
                    T[:, k] = T[:, k] * w % ctx.mod
            if k + 1 < n:
                f = A[r, k + 1:] // (ctx.p ** v)
                live = np.nonzero(f)[0]
                if live.size:
                    cols = k + 1 + live
                    A[:, cols] = (A[:, cols]
                                  - np.outer(A[:, k], f[live])) % ctx.mod
                    if track:
                        T[:, cols] = (T[:, cols]
                                      - np.outer(T[:, k], f[live])) % ctx.mod
            pivots.append((r, v))
            d += v
            k += 1
        self.ctx = ctx
        self.E = A
        self.T = T
        self.pivots = pivots
        self.rank = len(pivots)
        self.sigma = d - depth
        self.depth = d

    def kernel(self):
        """Kernel generators as columns (requires tracking)."""
        if self.T is None:
            raise ValueError("echelon was not tracked")
        return self.T[:, self.rank:].copy()

    def image(self):
        return self.E[:, :self.rank]

    def reduce(self, B, coeffs=False):
        """Reduce dense columns B against the echelon.

        Returns (residual, ok, C): ok[j] is False when column j needs a
        division that fails over Z_(p); C holds the echelon coefficients
        when requested.  The residual should be read at this echelon's
        depth combined with B's own.
        """
        ctx = self.ctx
        B = B.copy() % ctx.mod
        ncols = B.shape[1]
        ok = np.ones(ncols, dtype=bool)
        C = np.zeros((self.rank, ncols), dtype=np.int64) if coeffs else None
        for j, (r, v) in enumerate(self.pivots):
            row = B[r, :]
            if not row.any():
                continue
            pv = self.ctx.p ** v
            bad = (row % pv) != 0
            if bad.any():
                ok &= ~bad
                row = np.where(bad, 0, row)
            f = row // pv
            live = np.nonzero(f)[0]
            if live.size:
                B[:, live] = (B[:, live]
                              - np.outer(self.E[:, j], f[live])) % ctx.mod
                if coeffs:
                    C[j, live] = f[live]
        return B, ok, C

    def member(self, B, depth=0):
        """Boolean array: which dense columns of B lie in the span.

        ``depth`` is B's own; its junk gets divided by this echelon's
        pivots during reduction, so the residual reads at the larger of
        the span depth and depth + sigma.
        """
        res, ok, _ = self.reduce(B)
        d = max(self.depth, depth + self.sigma)
        zero = self.ctx.split_zero(res, d, "membership")
        return ok & zero.all(axis=0)

    def solve(self, B, depth=0):
        """X with A_original @ X = B columnwise, or None (needs tracking)."""
        if self.T is None:
            raise ValueError("echelon was not tracked")
        res, ok, C = self.reduce(B, coeffs=True)
        if not ok.all():
            return None
        d = max(self.depth, depth + self.sigma)
        zero = self.ctx.split_zero(res, d, "solve")
        if not zero.all():
            return None
        return self.ctx.matmul(self.T[:, :self.rank], C)


def col_echelon(A, ctx, track=False, depth=0):
    return Echelon(A, ctx, track=track, depth=depth)


def smith_uinv(P, ctx, depth=0):
    """Diagonalize U @ P @ V = D tracking U and U_inv only.

    Returns (vals, U, Uinv, depth): vals[i] is the valuation of the
    i-th diagonal divisor, or None when the diagonal is zero or junk (a
    free summand).  The column operations are not tracked; consumers
    only transform along the row side.  Ahead of pivot k the matrix is
    diagonal outside P[k:, k:], so the row pass (rows below k) and the
    column pass (row k alone) divide disjoint regions: each pivot costs
    its valuation once in depth.  Divisors are validated at their own
    acceptance depth: junk cannot sink below the floor in force when a
    pivot is read, and the pivot is immutable afterwards, so the final
    depth only concerns downstream consumers.
    """
    P = P.copy() % ctx.mod
    a, b = P.shape
    U = np.eye(a, dtype=np.int64)
    Uinv = np.eye(a, dtype=np.int64)
    vals = []
    d = depth
    k = 0
    top = min(a, b)
    while k < top:
        hit = _find_pivot(P[k:, k:], ctx, 0, ctx.floor(d, "smith"))
        if hit is None:
            break
        v, r, c = hit
        ctx.classify(v, d, "smith divisor")
        r += k
        c += k
        if r != k:
            P[[k, r], :] = P[[r, k], :]
            U[[k, r], :] = U[[r, k], :]
            Uinv[:, [k, r]] = Uinv[:, [r, k]]
        if c != k:
            P[:, [k, c]] = P[:, [c, k]]
        piv = int(P[k, k])
        unit = piv // (ctx.p ** v)
        if unit != 1:
            w = pow(unit, -1, ctx.mod)
            P[k, :] = P[k, :] * w % ctx.mod
            U[k, :] = U[k, :] * w % ctx.mod
            Uinv[:, k] = Uinv[:, k] * unit % ctx.mod
        pv = ctx.p ** v
        colf = P[k + 1:, k] // pv
        live = np.nonzero(colf)[0]
        if live.size:
            rows = k + 1 + live
            P[rows, :] = (P[rows, :] - np.outer(colf[live], P[k, :])) % ctx.mod
            U[rows, :] = (U[rows, :] - np.outer(colf[live], U[k, :])) % ctx.mod
            Uinv[:, k] = (Uinv[:, k] + ctx.matmul(
                Uinv[:, rows], colf[live][:, None])[:, 0]) % ctx.mod
        rowf = P[k, k + 1:] // pv
        live = np.nonzero(rowf)[0]
        if live.size:
            cols = k + 1 + live
            P[:, cols] = (P[:, cols] - np.outer(P[:, k], rowf[live])) % ctx.mod
        vals.append(v)
        d += v
        k += 1
    vals.extend([None] * (a - len(vals)))
    return vals, U, Uinv, d


class PKQuotient:
    """span(N)/span(D) readout, duck-compatible with QuotientStructure.

    ``torsion`` holds plain p-power ints, and reps are sparse ambient
    dicts.  A diagonal divisor that is zero or junk counts as a free
    summand; its class coordinate is a residue mod p^K.  The basis
    order is free generators first, then torsion, and ``rep_combos``
    gives each basis generator as a dense coefficient column over the
    numerator generators (used to push zigzag data through the class).
    """

    __slots__ = ("ctx", "ambient_dim", "free_rank", "torsion",
                 "torsion_reps", "free_reps", "rep_combos", "depth",
                 "in_depth", "_nech", "_U", "_free_idx", "_tors_idx",
                 "_tors_val")

    def __init__(self, ctx, ambient_dim, nech, U, vals, free_reps, tors_reps,
                 combos, depth=0, in_depth=0):
        self.ctx = ctx
        self.ambient_dim = ambient_dim
        self.depth = depth
        self.in_depth = in_depth
        self._nech = nech
        self._U = U
        self._free_idx = [i for i, v in enumerate(vals) if v is None]
        self._tors_idx = [i for i, v in enumerate(vals)
                          if v is not None and v > 0]
        self._tors_val = [vals[i] for i in self._tors_idx]
        self.free_rank = len(self._free_idx)
        self.torsion = [ctx.p ** v for v in self._tors_val]
        self.free_reps = free_reps
        self.torsion_reps = tors_reps
        self.rep_combos = combos

    @property
    def mod_p_dim(self):
        return self.free_rank + len(self.torsion)

    @property
    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def orders(self):
        """Cyclic order per basis generator, 0 meaning free."""
        return [0] * self.free_rank + list(self.torsion)

    def class_coordinates(self, v, depth=None):
        """(free list, torsion residue list) of the class of a dict vector.

        ``depth`` bounds the vector's own junk; it defaults to the
        depth the quotient was built at.  Coordinate junk is classified
        at the deeper of the Smith depth and the vector's depth plus
        the numerator elimination's pivot sum.
        """
        d_v = self.in_depth if depth is None else depth
        dense = self.ctx.to_dense(self.ambient_dim, [v])
        if self._nech is None:
            if dense.any():
                from .errors import NotInSpan
                raise NotInSpan("vector is not in the numerator span")
            return [], []
        c = self._nech.solve(dense, depth=d_v)
        if c is None:
            from .errors import NotInSpan
            raise NotInSpan("vector is not in the numerator span")
        y = self.ctx.matmul(self._U[:, :c.shape[0]], c)[:, 0]
        dread = max(self.depth, d_v + self._nech.sigma)
        fl = self.ctx.p ** self.ctx.floor(dread, "free coordinate")
        free = [0 if y[i] % fl == 0 else int(y[i])
                for i in self._free_idx]
        tors = [int(y[i]) % (self.ctx.p ** w)
                for i, w in zip(self._tors_idx, self._tors_val)]
        return free, tors

    def is_zero_class(self, v, depth=None):
        free, tors = self.class_coordinates(v, depth=depth)
        return all(c == 0 for c in free) and all(c == 0 for c in tors)


def subquotient_pk(N, D, ctx, where="", depth=0):
    """Structure of span(N)/span(D) for dense int64 generator matrices.

    D's columns must lie in span(N).  Mirrors the exact presentation
    computation: coordinates of D in N, plus the syzygies of N, feed one
    Smith pass whose diagonal lists the cyclic orders.
    """
    from .errors import NotInSpan
    amb, a = N.shape
    if a == 0:
        return PKQuotient(ctx, amb, None, np.eye(0, dtype=np.int64), [],
                          [], [], [], depth, depth)
    nech = col_echelon(N, ctx, track=True, depth=depth)
    Y = nech.solve(D % ctx.mod, depth=depth)
    if Y is None:
        raise NotInSpan("denominator outside the numerator span%s"
                        % (" at " + where if where else ""))
    S = nech.kernel()
    P = np.hstack([Y, S]) if (Y.shape[1] or S.shape[1]) else \
        np.zeros((a, 0), dtype=np.int64)
    vals, U, Uinv, dq = smith_uinv(P, ctx, depth=nech.depth)
    free_reps, tors_reps, combos = [], [], []
    for want_free in (True, False):
        for i, v in enumerate(vals):
            if (v is None) is not want_free or v == 0:
                continue
            combo = Uinv[:, i].copy()
            rep = ctx.to_sparse(ctx.matmul(N, combo[:, None])[:, 0])
            combos.append(combo)
            (free_reps if want_free else tors_reps).append(rep)
    return PKQuotient(ctx, amb, nech, U, vals, free_reps, tors_reps, combos,
                      dq, depth)
