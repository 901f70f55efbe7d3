"""Truncated reduced cobar complexes, Ext, Koszul Tor, and Levin index.

The cochain group C^{s,t} is free over the base on words
V*[T1|...|Ts]*g: V a base monomial, each Ti a nonempty monomial in the
Gamma-only generators (the kernel of the counit is free on these), g a
module generator, with internal degrees summing to t.  The differential
inserts reduced coproducts slotwise and ends with the reduced coaction,
with alternating signs; cofaces preserve internal degree, so no extra
degree signs enter, and d*d = 0 follows from coassociativity.

The reduced (rather than unreduced) complex is used throughout: it is
chain homotopy equivalent to the unreduced cosimplicial one by the
standard normalization argument and exponentially smaller.

Cohomology is exact: Smith normal form over the p-local integers, or
field elimination (bitmask fast path at p = 2).  A minimal-resolution
routine over the graded dual algebra lives at the bottom as an
independent cross-check path for tests.
"""

from fractions import Fraction
from math import gcd

from .comodule import Comodule
from .errors import (AxiomViolation, CompositionNotZero, OutOfRange,
                     RingMismatch, UnsupportedPresentation)
from .hopf import HopfAlgebroid, TensorPoly
from .linalg import (FP, LinearSolver, Matrix, change_ring, cohomology_at,
                     f2_cohomology, f2_presented_cohomology, hstack,
                     kernel_basis, presented_cohomology_at, solve,
                     subquotient_structure)
from .poly import Poly, basis_in_degree, mono_mul, render_coeff

__all__ = [
    "CobarComplex", "build_cobar", "ExtTable", "ExtClass", "ext",
    "render_cobar_element", "ext_table_tsv", "yoneda_product",
    "koszul_tor", "levin_index_one", "minimal_resolution_ext",
]


class CobarComplex:
    """Reduced cobar complex of a comodule, truncated at (s_max, t_max).

    Bases are built for s <= s_max + 1 and differentials for s <= s_max,
    so cohomology is available through s_max.  With check=True (the
    default) the build verifies that the differential preserves the
    relation span and squares to zero below the caps.
    """

    def __init__(self, hopf: HopfAlgebroid, M: Comodule, s_max, t_max,
                 reverse_basis=False, check=True):
        if M.hopf is not hopf:
            raise RingMismatch("comodule was built over a different "
                               "Hopf algebroid")
        if s_max < 0 or t_max < 0:
            raise ValueError("caps must be nonnegative")
        if t_max > hopf.cap:
            raise ValueError("t_max %d exceeds the algebra cap %d"
                             % (t_max, hopf.cap))
        self.hopf = hopf
        self.M = M
        self.s_max = s_max
        self.t_max = t_max
        self.reverse_basis = reverse_basis
        self._gmin = min(hopf.alphabet.degrees[hopf.alphabet.index(n)]
                         for n in hopf.g_names)
        self._twords_memo = {}
        self._basis = {}
        self._index = {}
        self._mat = {}
        self._rel = {}
        self._rel_solver = {}
        for t in range(0, t_max + 1):
            for s in range(0, s_max + 2):
                self._build_basis(s, t)
            for s in range(0, s_max + 1):
                self._build_matrix(s, t)
        if check:
            self._check()

    # -- bases -------------------------------------------------------------

    def _twords(self, s, d):
        """Ordered s-tuples of nonempty Gamma-monomials of total degree d."""
        if s == 0:
            return [()] if d == 0 else []
        key = (s, d)
        hit = self._twords_memo.get(key)
        if hit is not None:
            return hit
        h = self.hopf
        out = []
        lo = self._gmin
        for d1 in range(lo, d - lo * (s - 1) + 1):
            heads = basis_in_degree(h.alphabet, d1, subset=h.g_names)
            tails = self._twords(s - 1, d - d1)
            for T1 in heads:
                for rest in tails:
                    out.append((T1,) + rest)
        self._twords_memo[key] = out
        return out

    def _build_basis(self, s, t):
        h, M = self.hopf, self.M
        words = []
        for gi, g in enumerate(M.generators):
            rem = t - g.degree
            if rem < 0:
                continue
            for dT in range(self._gmin * s, rem + 1) if s else (0,):
                for Ts in self._twords(s, dT):
                    for V in basis_in_degree(h.alphabet, rem - dT,
                                             subset=h.a_names):
                        words.append((V, Ts, gi))
        if self.reverse_basis:
            words.reverse()
        self._basis[(s, t)] = words
        self._index[(s, t)] = {w: i for i, w in enumerate(words)}

    def basis(self, s, t):
        return self._basis.get((s, t), [])

    def index(self, s, t):
        return self._index.get((s, t), {})

    def dim(self, s, t):
        return len(self.basis(s, t))

    # -- differential --------------------------------------------------------

    def _emit(self, out, index, V, legs, gj, coeff):
        ring = self.hopf.ring
        word = (V, legs, gj)
        row = index.get(word)
        if row is None:
            raise CompositionNotZero("differential leaves the enumerated "
                                     "basis at word %r" % (word,))
        c = ring.add(out.get(row, ring.zero), coeff)
        if ring.is_zero(c):
            out.pop(row, None)
        else:
            out[row] = c

    def d_word(self, word, index):
        """Differential of one basis word as a {row: coeff} column."""
        h, M = self.hopf, self.M
        ring, alph = h.ring, h.alphabet
        V, Ts, gi = word
        s = len(Ts)
        pure = not h.a_names
        out = {}

        if s == 0:
            for (W, gj), c in M.reduced_coaction(gi).items():
                c = ring.neg(c)
                if V:
                    hit = mono_mul(alph, V, W)
                    if hit is None:
                        continue
                    sgn, m = hit
                    if sgn < 0:
                        c = ring.neg(c)
                    self._push_emit(out, index, (m,), gj, c)
                elif pure:
                    self._emit(out, index, (), (W,), gj, c)
                else:
                    self._push_emit(out, index, (W,), gj, c)
            if V:
                diff = Poly(ring, alph, {V: ring.one}, h.cap).sub(
                    h.eta_R_mono(V))
                for m, c in diff.terms.items():
                    self._push_emit(out, index, (m,), gi, ring.neg(c))
            return out

        legs0 = list(Ts)
        if V:
            hit = mono_mul(alph, V, Ts[0])
            if hit is None:
                return out
            legs0[0] = hit[1]
        base = tuple(legs0)

        buckets = {}

        def acc(gj, key, c):
            b = buckets.setdefault(gj, {})
            x = ring.add(b.get(key, ring.zero), c)
            if ring.is_zero(x):
                b.pop(key, None)
            else:
                b[key] = x

        for i in range(1, s + 1):
            D = h.reduced_diag_mono(base[i - 1])
            neg = (i % 2 == 1)
            for (L, R), c in D.terms.items():
                if neg:
                    c = ring.neg(c)
                acc(gi, base[:i - 1] + (L, R) + base[i:], c)
        neg_last = (s % 2 == 0)
        for (W, gj), c in M.reduced_coaction(gi).items():
            if neg_last:
                c = ring.neg(c)
            acc(gj, base + (W,), c)

        for gj, terms in buckets.items():
            if pure:
                for key, c in terms.items():
                    self._emit(out, index, (), key, gj, c)
            else:
                tp = h.push_left(TensorPoly(ring, alph, h.cap, s + 1, terms,
                                            _clean=True))
                for key, c in tp.terms.items():
                    V2, L0 = h.split_mono(key[0])
                    self._emit(out, index, V2, (L0,) + key[1:], gj, c)
        return out

    def _push_emit(self, out, index, legs, gj, coeff):
        """Canonicalize a one-or-more-leg mixed tensor and emit words."""
        h = self.hopf
        ring = h.ring
        tp = h.push_left(TensorPoly(ring, h.alphabet, h.cap, len(legs),
                                    {tuple(legs): coeff}, _clean=True))
        for key, c in tp.terms.items():
            V2, L0 = h.split_mono(key[0])
            self._emit(out, index, V2, (L0,) + key[1:], gj, c)

    def _build_matrix(self, s, t):
        here = self.basis(s, t)
        index = self.index(s + 1, t)
        cols = [self.d_word(w, index) for w in here]
        self._mat[(s, t)] = Matrix(self.hopf.ring, len(self.basis(s + 1, t)),
                                   len(here), cols)

    def matrix(self, s, t):
        """The differential C^{s,t} -> C^{s+1,t}."""
        m = self._mat.get((s, t))
        if m is None:
            return Matrix.zeros(self.hopf.ring, len(self.basis(s + 1, t)),
                                len(self.basis(s, t)))
        return m

    # -- relation spans ----------------------------------------------------------

    def rel_columns(self, s, t):
        """Columns spanning Gamma-words tensored with the relation module."""
        key = (s, t)
        if key in self._rel:
            return self._rel[key]
        h, M = self.hopf, self.M
        ring, alph = h.ring, h.alphabet
        index = self.index(s, t)
        cols = []
        for r in M.relations:
            some = next(iter(r))
            rdeg = (alph.mono_degree(some[0])
                    + M.generators[some[1]].degree)
            if s == 0:
                for U in basis_in_degree(alph, t - rdeg, subset=h.a_names):
                    col = {}
                    for (Vk, gk), ck in r.items():
                        sgn, m = mono_mul(alph, U, Vk)
                        c = ck if sgn > 0 else ring.neg(ck)
                        row = index[(m, (), gk)]
                        x = ring.add(col.get(row, ring.zero), c)
                        if ring.is_zero(x):
                            col.pop(row, None)
                        else:
                            col[row] = x
                    if col:
                        cols.append(col)
                continue
            for dT in range(self._gmin * s, t - rdeg + 1):
                for Ts in self._twords(s, dT):
                    for U in basis_in_degree(alph, t - rdeg - dT,
                                             subset=h.a_names):
                        col = {}
                        for (Vk, gk), ck in r.items():
                            tp = TensorPoly(ring, alph, h.cap, s,
                                            {Ts: ck}, _clean=True)
                            if Vk:
                                tp = tp.mul_leg_left(s - 1,
                                                     h.eta_R_mono(Vk))
                            tp = h.push_left(tp)
                            for kk, c in tp.terms.items():
                                V2, L0 = h.split_mono(kk[0])
                                sgn, Vm = mono_mul(alph, U, V2)
                                if sgn < 0:
                                    c = ring.neg(c)
                                row = index[(Vm, (L0,) + kk[1:], gk)]
                                x = ring.add(col.get(row, ring.zero), c)
                                if ring.is_zero(x):
                                    col.pop(row, None)
                                else:
                                    col[row] = x
                        if col:
                            cols.append(col)
        self._rel[key] = cols
        return cols

    def rel_matrix(self, s, t):
        cols = self.rel_columns(s, t)
        return Matrix(self.hopf.ring, self.dim(s, t), len(cols), cols)

    def _rel_contains(self, s, t, vec):
        if not vec:
            return True
        key = (s, t)
        solver = self._rel_solver.get(key)
        if solver is None:
            solver = LinearSolver(self.rel_matrix(s, t))
            self._rel_solver[key] = solver
        return solver.solve(vec) is not None

    # -- invariants ------------------------------------------------------------------

    def _check(self):
        presented = bool(self.M.relations)
        for t in range(0, self.t_max + 1):
            if presented:
                for s in range(0, self.s_max + 1):
                    d = self._mat[(s, t)]
                    for col in self.rel_columns(s, t):
                        img = d.mulvec(col)
                        if not self._rel_contains(s + 1, t, img):
                            raise AxiomViolation(
                                "coaction is not well-defined modulo the "
                                "relations at (s,t)=(%d,%d)" % (s, t))
            for s in range(0, self.s_max):
                comp = self._mat[(s + 1, t)].mul(self._mat[(s, t)])
                if comp.is_zero():
                    continue
                if not presented:
                    raise CompositionNotZero(
                        "d*d != 0 at (s,t)=(%d,%d)" % (s, t))
                for col in comp.cols:
                    if not self._rel_contains(s + 2, t, col):
                        raise CompositionNotZero(
                            "d*d does not vanish modulo relations at "
                            "(s,t)=(%d,%d)" % (s, t))


def build_cobar(h: HopfAlgebroid, M: Comodule, s_max, t_max,
                reverse_basis=False, check=True) -> CobarComplex:
    """Assemble the truncated reduced cobar complex and verify d*d = 0."""
    return CobarComplex(h, M, s_max, t_max, reverse_basis=reverse_basis,
                        check=check)


# -- Ext ------------------------------------------------------------------------


def render_cobar_element(hopf, M, terms) -> str:
    """Text form of a cobar element {word: coeff}, deterministic order."""
    alph = hopf.alphabet
    ring = hopf.ring

    def word_key(w):
        V, Ts, gi = w
        return (gi, len(Ts), tuple(alph.mono_sort_key(T) for T in Ts),
                alph.mono_sort_key(V))

    def word_text(w):
        V, Ts, gi = w
        parts = []
        if V:
            parts.append(alph.render_mono(V))
        if Ts:
            parts.append("[%s]" % "|".join(alph.render_mono(T) for T in Ts))
        parts.append(M.generators[gi].name)
        return "*".join(parts)

    pieces = []
    for w in sorted(terms, key=word_key):
        c = terms[w]
        neg = False
        if not ring.is_field or ring.p is None:
            neg = c < 0
            if neg:
                c = -c
        txt = render_coeff(c)
        body = word_text(w)
        if txt != "1":
            body = "%s*%s" % (txt, body)
        pieces.append(("-" if neg else "+", body))
    if not pieces:
        return "0"
    sign0, body0 = pieces[0]
    out = ("-" + body0) if sign0 == "-" else body0
    for sign, body in pieces[1:]:
        out += " %s %s" % (sign, body)
    return out


def _unit_scale(ring, p, vec):
    """Scale a p-local vector by a unit: integral entries, p-power content,
    positive leading coefficient.  The class generated is unchanged."""
    if not vec:
        return vec
    den = 1
    for c in vec.values():
        d = Fraction(c).denominator
        den = den * d // gcd(den, d)
    g = 0
    for c in vec.values():
        g = gcd(g, abs((Fraction(c) * den).numerator))
    while g % p == 0:
        g //= p
    scale = Fraction(den, g)
    out = {i: ring.coerce(Fraction(c) * scale) for i, c in vec.items()}
    if Fraction(out[min(out)]) < 0:
        out = {i: ring.neg(c) for i, c in out.items()}
    return out


class ExtTable:
    """Ext per (s,t): exact group structure plus cocycle representatives.

    entries maps (s,t) to (free_rank, torsion list, representatives);
    representatives are {word: coeff} cocycles, free generators first.
    """

    def __init__(self, hopf, M, s_max, t_max, complex_):
        self.hopf = hopf
        self.M = M
        self.s_max = s_max
        self.t_max = t_max
        self.complex = complex_
        self.entries = {}
        self._quots = {}

    def _store(self, s, t, quot):
        cx = self.complex
        ring = self.hopf.ring
        tidy = not ring.is_field and ring.p is not None
        basis = cx.basis(s, t)
        reps = []
        for vec in list(quot.free_reps) + list(quot.torsion_reps):
            if tidy:
                vec = _unit_scale(ring, ring.p, vec)
            reps.append({basis[i]: c for i, c in vec.items()})
        torsion = [int(d) for d in quot.torsion]
        if quot.free_rank or torsion:
            self.entries[(s, t)] = (quot.free_rank, torsion, reps)
            self._quots[(s, t)] = quot

    def group(self, s, t):
        """(free_rank, torsion list) at one bidegree."""
        free, torsion, _ = self.entries.get((s, t), (0, [], []))
        return free, torsion

    def dim_fp(self, s, t):
        """Dimension of Ext^{s,t} tensor F_p."""
        free, torsion, _ = self.entries.get((s, t), (0, [], []))
        return free + len(torsion)

    def representatives(self, s, t):
        return self.entries.get((s, t), (0, [], []))[2]

    def labels(self, s, t):
        return [render_cobar_element(self.hopf, self.M, rep)
                for rep in self.representatives(s, t)]

    def classes(self):
        """All stored classes as (s, t, i) references, sorted."""
        out = []
        for (s, t) in sorted(self.entries):
            n = len(self.representatives(s, t))
            out.extend((s, t, i) for i in range(n))
        return out


def _f2_cols(ring, mat: Matrix):
    cols = []
    for col in mat.cols:
        m = 0
        for i, c in col.items():
            if ring.val(c) == 0:
                m |= 1 << i
        cols.append(m)
    return cols


def ext(h: HopfAlgebroid, M: Comodule, s_max, t_max, reverse_basis=False,
        complex_=None) -> ExtTable:
    """Ext over the Hopf algebroid as cohomology of the reduced cobar.

    Exact over the p-local integers (torsion certified via Smith normal
    form); bitmask elimination fast path over F_2.
    """
    cx = complex_ or build_cobar(h, M, s_max, t_max,
                                 reverse_basis=reverse_basis)
    ring = h.ring
    table = ExtTable(h, M, s_max, t_max, cx)
    presented = bool(M.relations)
    regime = M.coefficient_regime()
    p = h.prime

    for t in range(0, t_max + 1):
        for s in range(0, s_max + 1):
            n = cx.dim(s, t)
            if n == 0:
                continue
            din = cx.matrix(s - 1, t) if s > 0 else None
            dout = cx.matrix(s, t)
            if not presented:
                if ring.is_field and p == 2:
                    quot = f2_cohomology(
                        _f2_cols(ring, din) if din is not None else None,
                        _f2_cols(ring, dout), n)
                else:
                    quot = cohomology_at(din, dout, ring=ring, dim_here=n)
            elif p == 2 and (ring.is_field or regime == "MODP"):
                quot = f2_presented_cohomology(
                    n,
                    _f2_cols(ring, din) if din is not None else None,
                    _f2_cols(ring, dout),
                    [m for m in _f2_cols(ring, cx.rel_matrix(s, t)) if m],
                    [m for m in _f2_cols(ring, cx.rel_matrix(s + 1, t))
                     if m])
            elif regime == "MODP" and not ring.is_field:
                fp = FP(p)
                quot = presented_cohomology_at(
                    fp, n,
                    change_ring(din, fp) if din is not None else None,
                    change_ring(dout, fp),
                    change_ring(cx.rel_matrix(s, t), fp),
                    change_ring(cx.rel_matrix(s + 1, t), fp))
            else:
                quot = presented_cohomology_at(
                    ring, n, din, dout,
                    cx.rel_matrix(s, t), cx.rel_matrix(s + 1, t))
            table._store(s, t, quot)
    return table


def ext_table_tsv(table: ExtTable) -> str:
    """Tab-separated rows: s, t, w, free rank, torsion, representatives."""
    lines = ["s\tt\tw\tfree\ttorsion\trepresentatives"]
    for (s, t) in sorted(table.entries):
        free, torsion, _ = table.entries[(s, t)]
        tor = ",".join(str(d) for d in torsion) if torsion else "-"
        reps = "; ".join(table.labels(s, t))
        lines.append("%d\t%d\t-\t%d\t%s\t%s" % (s, t, free, tor, reps))
    return "\n".join(lines) + "\n"


class ExtClass:
    """A class in the stored basis at one bidegree.

    coords is (free coefficients, torsion residues), matching the order
    of the stored representatives.
    """

    __slots__ = ("s", "t", "free", "torsion")

    def __init__(self, s, t, free, torsion):
        self.s = s
        self.t = t
        self.free = list(free)
        self.torsion = list(torsion)

    @property
    def is_zero(self):
        return (all(not c for c in self.free)
                and all(r == 0 for r in self.torsion))

    def __eq__(self, other):
        return (isinstance(other, ExtClass) and self.s == other.s
                and self.t == other.t and self.free == other.free
                and self.torsion == other.torsion)

    def __repr__(self):
        return "ExtClass(s=%d, t=%d, free=%r, torsion=%r)" % (
            self.s, self.t, self.free, self.torsion)


def _concat_reps(h, M, xrep, yrep):
    """Concatenation of two cobar elements over a cyclic algebra comodule."""
    ring, alph = h.ring, h.alphabet
    out = {}

    def add_word(w, c):
        x = ring.add(out.get(w, ring.zero), c)
        if ring.is_zero(x):
            out.pop(w, None)
        else:
            out[w] = x

    for (Vx, Tx, _), cx in xrep.items():
        for (Vy, Ty, _), cy in yrep.items():
            c = ring.mul(cx, cy)
            sx, sy = len(Tx), len(Ty)
            if sx == 0 and sy == 0:
                sgn, m = mono_mul(alph, Vx, Vy)
                add_word((m, (), 0), c if sgn > 0 else ring.neg(c))
                continue
            if sx == 0:
                sgn, m = mono_mul(alph, Vx, Vy)
                add_word((m, Ty, 0), c if sgn > 0 else ring.neg(c))
                continue
            legs = list(Tx)
            if Vx:
                _, m0 = mono_mul(alph, Vx, Tx[0])
                legs[0] = m0
            if sy == 0:
                tp = TensorPoly(ring, alph, h.cap, sx,
                                {tuple(legs): c}, _clean=True)
                if Vy:
                    tp = tp.mul_leg_left(sx - 1, h.eta_R_mono(Vy))
                tp = h.push_left(tp)
                for key, cc in tp.terms.items():
                    V2, L0 = h.split_mono(key[0])
                    add_word((V2, (L0,) + key[1:], 0), cc)
                continue
            ylegs = list(Ty)
            if Vy:
                _, my = mono_mul(alph, Vy, Ty[0])
                ylegs[0] = my
            key = tuple(legs) + tuple(ylegs)
            tp = h.push_left(TensorPoly(ring, alph, h.cap, sx + sy,
                                        {key: c}, _clean=True))
            for kk, cc in tp.terms.items():
                V2, L0 = h.split_mono(kk[0])
                add_word((V2, (L0,) + kk[1:], 0), cc)
    return out


def yoneda_product(table: ExtTable, x, y) -> ExtClass:
    """Concatenation product of two stored classes, in stored coordinates.

    x and y are (s, t, i) references into the table.  The comodule must
    be a cyclic algebra quotient (single generator in degree zero).
    """
    M = table.M
    if len(M.generators) != 1 or M.generators[0].degree != 0:
        raise UnsupportedPresentation(
            "products need a cyclic algebra comodule")
    sx, tx, ix = x
    sy, ty, iy = y
    s, t = sx + sy, tx + ty
    if s > table.s_max or t > table.t_max:
        raise OutOfRange("product lands at (%d,%d), beyond caps (%d,%d)"
                         % (s, t, table.s_max, table.t_max))
    xrep = table.representatives(sx, tx)[ix]
    yrep = table.representatives(sy, ty)[iy]
    prod = _concat_reps(table.hopf, M, xrep, yrep)
    quot = table._quots.get((s, t))
    if quot is None:
        # the group vanishes there, so the cocycle product is a boundary
        return ExtClass(s, t, [], [])
    index = table.complex.index(s, t)
    vec = {index[w]: c for w, c in prod.items()}
    free, tors = quot.class_coordinates(vec)
    return ExtClass(s, t, free, tors)


# -- Koszul Tor and the Levin index ------------------------------------------------


def _koszul_generators(h, t_max):
    """The regular sequence (p, v1, ...) truncated to degree <= t_max."""
    gens = [((), h.prime, 0)]
    for name in h.a_names:
        i = h.alphabet.index(name)
        d = h.alphabet.degrees[i]
        if d <= t_max:
            gens.append((((i, 1),), 1, d))
    return gens


def _subsets(n, k, start=0):
    if k == 0:
        yield ()
        return
    for first in range(start, n - k + 1):
        for rest in _subsets(n, k - 1, first + 1):
            yield (first,) + rest


class _KoszulComplex:
    """Koszul chains on (p, v1, ...) tensored with a presented module."""

    def __init__(self, M: Comodule, s_max, t_max):
        self.M = M
        self.h = M.hopf
        self.s_max = s_max
        self.t_max = t_max
        self.gens = _koszul_generators(self.h, t_max)
        self._basis = {}
        self._index = {}
        self._mat = {}
        self._rel = {}
        for t in range(0, t_max + 1):
            for s in range(0, s_max + 2):
                self._build_basis(s, t)
            for s in range(1, s_max + 2):
                self._build_matrix(s, t)

    def _build_basis(self, s, t):
        words = []
        for S in _subsets(len(self.gens), s):
            dS = sum(self.gens[j][2] for j in S)
            rem = t - dS
            if rem < 0:
                continue
            for key in self.M.module_monomials(rem):
                words.append((S, key))
        self._basis[(s, t)] = words
        self._index[(s, t)] = {w: i for i, w in enumerate(words)}

    def basis(self, s, t):
        return self._basis.get((s, t), [])

    def _build_matrix(self, s, t):
        """The boundary K_s -> K_{s-1} in internal degree t."""
        ring, alph = self.h.ring, self.h.alphabet
        index = self._index[(s - 1, t)]
        cols = []
        for (S, (V, gi)) in self.basis(s, t):
            col = {}
            for pos, j in enumerate(S):
                mono, scal, _ = self.gens[j]
                sgn, m = mono_mul(alph, mono, V)
                c = ring.coerce(scal * sgn)
                if pos % 2:
                    c = ring.neg(c)
                S2 = S[:pos] + S[pos + 1:]
                row = index[(S2, (m, gi))]
                x = ring.add(col.get(row, ring.zero), c)
                if ring.is_zero(x):
                    col.pop(row, None)
                else:
                    col[row] = x
            cols.append(col)
        self._mat[(s, t)] = Matrix(ring, len(self.basis(s - 1, t)),
                                   len(self.basis(s, t)), cols)

    def matrix(self, s, t):
        m = self._mat.get((s, t))
        if m is None:
            return Matrix.zeros(self.h.ring, len(self.basis(s - 1, t)),
                                len(self.basis(s, t)))
        return m

    def rel_matrix(self, s, t):
        key = (s, t)
        if key in self._rel:
            return self._rel[key]
        ring = self.h.ring
        index = self._index[(s, t)]
        cols = []
        for S in _subsets(len(self.gens), s):
            dS = sum(self.gens[j][2] for j in S)
            rem = t - dS
            if rem < 0:
                continue
            sub = self.M.module_monomials(rem)
            subindex = {k: i for i, k in enumerate(sub)}
            for col in self.M.relation_columns(rem, subindex):
                cols.append({index[(S, sub[i])]: c for i, c in col.items()})
        m = Matrix(ring, len(self.basis(s, t)), len(cols), cols)
        self._rel[key] = m
        return m


def koszul_tor(M: Comodule, s_max, t_max):
    """Tor over the base ring against F_p, per (s,t), as F_p dimensions.

    Computed from the Koszul complex on the truncated regular sequence
    (p, v1, ...) tensored with the module underlying M.
    """
    kx = _KoszulComplex(M, s_max, t_max)
    ring = M.hopf.ring
    out = {}
    for t in range(0, t_max + 1):
        for s in range(0, s_max + 1):
            n = len(kx.basis(s, t))
            if n == 0:
                continue
            quot = presented_cohomology_at(
                ring, n, kx.matrix(s + 1, t), kx.matrix(s, t),
                kx.rel_matrix(s, t), kx.rel_matrix(s - 1, t)
                if s > 0 else None)
            dim = quot.free_rank + len(quot.torsion)
            if ring.p is not None and not ring.is_field:
                if quot.free_rank:
                    raise CompositionNotZero(
                        "Tor against the residue field came out non-torsion")
                for d in quot.torsion:
                    if d != M.hopf.prime:
                        raise CompositionNotZero(
                            "Tor torsion of order %d, expected %d"
                            % (d, M.hopf.prime))
            if dim:
                out[(s, t)] = dim
    return out


class _IdealKoszul:
    """Koszul chains of the submodule I^n * M inside the free words of M.

    Chains are lattices L (ideal times module, plus relations) inside the
    free Koszul words; relations R sit inside L.  Homology is
    {x in L : dx in R}/ (d L + R), and the inclusion-induced maps between
    consecutive powers read off directly since all vectors share the
    ambient coordinates.
    """

    def __init__(self, kx: _KoszulComplex, n):
        from .hopf import ideal_power_basis
        self.kx = kx
        self.n = n
        self.h = kx.h
        self._L = {}
        self._R = {}
        self._hom = {}
        for t in range(0, kx.t_max + 1):
            for s in range(0, kx.s_max + 2):
                self._build(s, t, ideal_power_basis)

    def _build(self, s, t, ideal_power_basis):
        kx, h, n = self.kx, self.h, self.n
        ring, alph = h.ring, h.alphabet
        index = kx._index[(s, t)]
        Lcols = []
        for S in _subsets(len(kx.gens), s):
            dS = sum(kx.gens[j][2] for j in S)
            rem = t - dS
            if rem < 0:
                continue
            for gi, g in enumerate(kx.M.generators):
                dg = rem - g.degree
                if dg < 0:
                    continue
                for e, V in ideal_power_basis(h, n, dg):
                    row = index[(S, (V, gi))]
                    Lcols.append({row: ring.coerce(h.prime ** e)})
        rel = kx.rel_matrix(s, t)
        Lcols.extend(col for col in rel.cols if col)
        dim = len(kx.basis(s, t))
        self._L[(s, t)] = Matrix(ring, dim, len(Lcols), Lcols)
        self._R[(s, t)] = rel

    def homology(self, s, t):
        """QuotientStructure with ambient (free-word) representatives."""
        hit = self._hom.get((s, t))
        if hit is not None:
            return hit
        kx = self.kx
        ring = self.h.ring
        L = self._L[(s, t)]
        R = self._R[(s, t)]
        d_here = kx.matrix(s, t)
        d_up = kx.matrix(s + 1, t)
        L_up = self._L[(s + 1, t)]
        R_down = self._R[(s - 1, t)] if s > 0 else Matrix.zeros(
            ring, d_here.nrows, 0)
        dL = Matrix(ring, d_here.nrows, L.ncols,
                    [d_here.mulvec(c) for c in L.cols])
        stacked = hstack(dL, R_down)
        kern = kernel_basis(stacked)
        zcols = []
        for v in kern:
            u = {i: c for i, c in v.items() if i < L.ncols}
            w = L.mulvec(u)
            if w:
                zcols.append(w)
        Z = Matrix(ring, L.nrows, len(zcols), zcols)
        bcols = [d_up.mulvec(c) for c in L_up.cols] + list(R.cols)
        B = Matrix(ring, L.nrows, len(bcols), bcols)
        quot = subquotient_structure(Z, B)
        self._hom[(s, t)] = quot
        return quot


def levin_index_one(M: Comodule, n_max, s_max, t_max):
    """Whether the power-of-the-ideal maps vanish below the caps.

    For each 1 <= n <= n_max, computes the map induced by the inclusion
    I^n M -> I^(n-1) M on Tor against F_p (the dual of the Ext map that
    defines the index) and reports whether it is zero for s <= s_max,
    t <= t_max.  The verdict never claims anything beyond the caps.
    """
    kx = _KoszulComplex(M, s_max, t_max)
    layers = {n: _IdealKoszul(kx, n) for n in range(0, n_max + 1)}
    out = {}
    for n in range(1, n_max + 1):
        witnesses = []
        for t in range(0, t_max + 1):
            for s in range(0, s_max + 1):
                hn = layers[n].homology(s, t)
                if hn.is_trivial:
                    continue
                hprev = layers[n - 1].homology(s, t)
                if hprev.is_trivial:
                    continue
                for rep in list(hn.free_reps) + list(hn.torsion_reps):
                    if not hprev.is_zero_class(rep):
                        witnesses.append((s, t))
                        break
        out[n] = {"vanishes": not witnesses, "witnesses": witnesses}
    return out


# -- minimal-resolution cross-check (test oracle) -----------------------------------


def minimal_resolution_ext(h: HopfAlgebroid, s_max, t_max):
    """Ext dimensions over the graded dual algebra via minimal resolution.

    Independent secondary path for tests: dualizes the coalgebra
    degreewise, then builds a minimal free resolution of the ground
    field.  Only for Hopf algebras over a field with no base generators.
    """
    if h.a_names:
        raise UnsupportedPresentation(
            "minimal resolutions need a field coalgebra (no base "
            "generators)")
    ring, alph = h.ring, h.alphabet
    basis = {d: basis_in_degree(alph, d) for d in range(0, t_max + 1)}

    mult_memo = {}

    def mult_table(a, b):
        """Matrix of A_a tensor A_b -> A_{a+b} in dual-basis coordinates."""
        key = (a, b)
        hit = mult_memo.get(key)
        if hit is not None:
            return hit
        table = {}
        for m in basis[a + b]:
            D = h.diag_mono(m)
            for (x, y), c in D.terms.items():
                dx = alph.mono_degree(x)
                if dx != a:
                    continue
                table.setdefault((x, y), {})[m] = c
        mult_memo[key] = table
        return table

    def act(a_mono, vec):
        """Left-multiply a free-module vector by the dual basis element
        of a_mono, in dual-basis coordinates."""
        a = alph.mono_degree(a_mono)
        out = {}
        for (gi, m), c in vec.items():
            b = alph.mono_degree(m)
            if a + b > t_max:
                continue
            table = mult_table(a, b)
            img = table.get((a_mono, m))
            if not img:
                continue
            for mm, cc in img.items():
                keyv = (gi, mm)
                x = ring.add(out.get(keyv, ring.zero),
                             ring.mul(c, cc))
                if ring.is_zero(x):
                    out.pop(keyv, None)
                else:
                    out[keyv] = x
        return out

    # generators of F_s: list of (degree, kernel vector over F_{s-1})
    dims = {}
    # F_0 = A, one generator in degree 0; its "kernel vectors" are in A
    gens = [(0, None)]
    dims[(0, 0)] = 1
    prev_gens = gens

    def free_basis_at(gen_list, t):
        out = []
        for gi, (dg, _) in enumerate(gen_list):
            if t - dg < 0:
                continue
            for m in basis[t - dg]:
                out.append((gi, m))
        return out

    prev_prev_gens = None
    for s in range(1, s_max + 1):
        new_gens = []
        # boundary F_s would hit: kernel of d_{s-1}: F_{s-1} -> F_{s-2}
        for t in range(0, t_max + 1):
            rows = free_basis_at(prev_gens, t)
            rowindex = {k: i for i, k in enumerate(rows)}
            if not rows:
                continue
            # kernel of the map out of F_{s-1} in degree t
            if s == 1:
                # augmentation A -> k: kernel = positive-degree part
                kern_vecs = []
                if t > 0:
                    kern_vecs = [{rowindex[k]: ring.one} for k in rows]
            else:
                cols = []
                tgt_rows = free_basis_at(prev_prev_gens, t)
                tgt_index = {k: i for i, k in enumerate(tgt_rows)}
                for k in rows:
                    gi, m = k
                    dvec = prev_gens[gi][1]
                    img = act(m, dvec) if m else dict(dvec)
                    cols.append({tgt_index[kk]: c for kk, c in img.items()})
                mat = Matrix(ring, len(tgt_rows), len(cols), cols)
                kern_vecs = kernel_basis(mat)
            if not kern_vecs:
                continue
            # span of A+ times generators already chosen at lower degree
            old_cols = []
            for dg, vec in new_gens:
                gap = t - dg
                if gap <= 0:
                    continue
                for a_mono in basis[gap]:
                    img = act(a_mono, vec)
                    if img:
                        old_cols.append(
                            {rowindex[k]: c for k, c in img.items()})
            count = 0
            solver_cols = list(old_cols)
            for kv in kern_vecs:
                v = {i: c for i, c in kv.items()}
                mat2 = Matrix(ring, len(rows), len(solver_cols),
                              solver_cols)
                if solve(mat2, v) is None:
                    # genuinely new generator
                    vec = {rows[i]: c for i, c in v.items()}
                    new_gens.append((t, vec))
                    solver_cols.append(v)
                    count += 1
            if count:
                dims[(s, t)] = count
        prev_prev_gens = prev_gens
        prev_gens = new_gens
    return dims
