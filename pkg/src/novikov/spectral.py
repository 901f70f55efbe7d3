"""Weight spectral sequences of comodules, with interactive sessions.

Two constructions feed one page engine.  The I-adic route filters the
reduced cobar complex by total weight (cobar degree plus coefficient
weight); the descent route runs the normalized unit-insertion complex
against the quotient Hopf algebroid Gamma/I with Koszul-resolved
columns, filtered by cosimplicial level.  Pages, differentials and
permanence are computed exactly over Z_(p) lattices, so every reported
dimension is an honest F_p dimension and no torsion is approximated.

Results split into an immutable machine layer (pages, machine
differentials, permanent and undetermined classes, stable spots) and a
replayable session overlay (user-asserted differentials, recorded
products, Leibniz propagation, pins, undo/redo).  Sessions serialize as
origin data plus an event log and replay bit for bit; page tables are
never stored.  A session is single-writer: callers serialize access,
as the HTTP service does with a per-session lock.
"""

import itertools
import json

import numpy as np

from .cobar import CobarComplex, _koszul_generators, render_cobar_element
from .comodule import Comodule, parse_comodule, render_comodule
from .errors import (AxiomViolation, CapMismatch, CapTooSmall,
                     CompositionNotZero, ContradictionDetected, DeadClass,
                     IncompatibleTridegree, NotInSpan, OutOfRange,
                     RangeUnstable, RingMismatch, SessionReplayError,
                     UnsupportedPresentation)
from .fpmat import PK, PrecisionLoss, col_echelon, subquotient_pk
from .hopf import TensorPoly, build_bp
from .linalg import (FP, LinearSolver, Matrix, hstack, kernel_basis,
                     lattice_contains, lattice_intersection, matrix_rank,
                     subquotient_structure)
from .poly import basis_in_degree, mono_mul

__all__ = [
    "Caps", "FilteredCobar", "DescentComplex", "SSPage", "SSSession",
    "algnss_iadic", "algnss_cosimplicial",
    "assert_differential", "record_product", "pin_survivor",
    "import_differential", "undo", "redo",
    "convergence_check", "compare_sessions",
    "serialize_session", "load_session",
]


# -- caps ---------------------------------------------------------------------

class Caps:
    """Truncation box (s_max, t_max, w_max) for a spectral sequence run."""

    __slots__ = ("s_max", "t_max", "w_max")

    def __init__(self, s_max, t_max, w_max=None):
        if s_max < 0 or t_max < 0 or (w_max is not None and w_max < 0):
            raise ValueError("caps must be nonnegative")
        self.s_max = int(s_max)
        self.t_max = int(t_max)
        self.w_max = None if w_max is None else int(w_max)

    @classmethod
    def coerce(cls, caps):
        if isinstance(caps, Caps):
            return caps
        caps = tuple(caps)
        if len(caps) == 2:
            return cls(caps[0], caps[1])
        if len(caps) == 3:
            return cls(*caps)
        raise ValueError("caps must be (s_max, t_max) or (s_max, t_max, w_max)")

    def astuple(self):
        return (self.s_max, self.t_max, self.w_max)

    def __repr__(self):
        return "Caps(%d, %d, %r)" % (self.s_max, self.t_max, self.w_max)


def _spot(s, t, w):
    return (int(s), int(t), int(w))


# -- the I-adic weight filtration of the cobar complex ------------------------

class FilteredCobar:
    """Reduced cobar complex with its total-weight lattice filtration.

    A basis word p^k V [T1|...|Ts] g sits in weight s + k + wt(V), where
    wt counts base generators with multiplicity.  F^w C^{s,t} is the
    Z_(p) lattice spanned by p^max(0, w - s - wt(V)) times each word,
    together with the relation span of the presented module.  The
    differential never lowers weight and strictly raises it on the
    associated graded, so the first page of the filtration spectral
    sequence is gr itself and machine d_r raises weight by exactly r.
    """

    definition = "iadic"

    def __init__(self, h, M, caps, check=True):
        if h.ring.is_field:
            raise UnsupportedPresentation(
                "the weight filtration needs a Z_(p) coefficient ring; "
                "got a field")
        if M.hopf is not h:
            raise RingMismatch("comodule over a different Hopf algebroid")
        caps = Caps.coerce(caps)
        if h.cap < caps.t_max:
            raise CapMismatch(
                "hopf algebroid truncated at degree %d cannot chart t <= %d"
                % (h.cap, caps.t_max))
        self.h = h
        self.M = M
        self.ring = h.ring
        self.p = h.prime
        # bases to s_max + 2 and differentials to s_max + 1 so that page
        # modules one column past the display range are available
        self.cx = CobarComplex(h, M, caps.s_max + 1, caps.t_max, check=check)
        alph = h.alphabet
        self._wt = {}
        top = 0
        for t in range(caps.t_max + 1):
            for s in range(caps.s_max + 3):
                words = self.cx.basis(s, t)
                if not words:
                    continue
                wt = [s + alph.mono_weight(V) for (V, Ts, gi) in words]
                self._wt[(s, t)] = wt
                if s <= caps.s_max:
                    top = max(top, max(wt))
        if caps.w_max is None:
            caps = Caps(caps.s_max, caps.t_max, top + 1)
        self.caps = caps
        self.s_lo = 0
        self.level_max = caps.w_max
        self._filt = {}
        self._nonempty = any(self.cx.basis(s, t)
                             for t in range(caps.t_max + 1)
                             for s in range(caps.s_max + 1))

    # engine interface ---------------------------------------------------

    def dim(self, s, t):
        return self.cx.dim(s, t)

    def dmat(self, s, t):
        return self.cx.matrix(s, t)

    def relmat(self, s, t):
        return self.cx.rel_matrix(s, t)

    def word_weights(self, s, t):
        return self._wt.get((s, t), [])

    def filt(self, s, t, level):
        """Generators of F^level C^{s,t} as matrix columns, plus relations."""
        n = self.dim(s, t)
        key = (s, t, level)
        hit = self._filt.get(key)
        if hit is not None:
            return hit
        ring = self.ring
        wt = self.word_weights(s, t)
        cols = []
        for i in range(n):
            e = max(0, level - wt[i])
            cols.append({i: ring.coerce(self.p ** e)})
        rel = self.relmat(s, t)
        out = Matrix(ring, n, n, cols)
        if rel is not None and rel.ncols:
            out = hstack(out, rel)
        self._filt[key] = out
        return out

    def class_weight(self, s, t, vec):
        """Largest w with vec in F^w, or None for the zero/relation class."""
        if not vec:
            return None
        w = 0
        while w <= self.level_max + 1:
            if not lattice_contains(self.filt(s, t, w + 1), vec):
                return w
            w += 1
        return None

    def complete_column(self, s, t):
        """True when every word of the column fits strictly below w_max."""
        wt = self.word_weights(s, t)
        return not wt or max(wt) < self.caps.w_max

    def display_weight(self, s, t, level, rep):
        return level

    def check_weight_monotone(self):
        """Verify the differential of each word lands one weight deeper."""
        for (s, t), wt in sorted(self._wt.items()):
            if s > self.caps.s_max + 1 or self.dim(s + 1, t) == 0:
                continue
            d = self.dmat(s, t)
            for i, w in enumerate(wt):
                col = d.col(i)
                if col and not lattice_contains(self.filt(s + 1, t, w + 1),
                                                col):
                    raise AxiomViolation(
                        "differential drops weight at (%d,%d) word %d"
                        % (s, t, i))
        return True

    def label(self, s, t, i, extra_p=0):
        word = self.cx.basis(s, t)[i]
        text = render_cobar_element(self.h, self.M, {word: 1})
        if extra_p > 0:
            q = "q0" if extra_p == 1 else "q0^%d" % extra_p
            return "%s %s" % (q, text)
        return text

    def vector_label(self, s, t, level, vec):
        """Label a lattice vector by its lowest-index word component."""
        if not vec:
            return "0"
        i = min(vec)
        c = vec[i]
        val = 0
        num = c.numerator if hasattr(c, "numerator") else int(c)
        num = abs(num)
        while num and num % self.p == 0:
            num //= self.p
            val += 1
        return self.label(s, t, i, val)


# -- generic page engine over a filtered complex -------------------------------

class _PageEngine:
    """Exact pages of a filtered cochain complex of Z_(p) lattices.

    The numerator lattice at page r is Z_r = F^l meet d^{-1} F^{l+r};
    the denominator is Z_{r-1} one level up plus d of Z_{r-1} from r-1
    levels down.  Every page spot is an elementary abelian p-group
    because p times a cycle moves its graded class one level deeper;
    the engine checks this and works with honest F_p tables from then
    on.  Differentials are read off by expressing d of each numerator
    representative in the target page module, so the bounded zig-zag
    and the lattice formulation agree by construction.
    """

    def __init__(self, fc, r_limit):
        self.fc = fc
        self.r_limit = r_limit
        self._z = {}
        self._pm = {}
        self._dead = set()

    def zr(self, s, t, level, r):
        n = self.fc.dim(s, t)
        if n == 0:
            return Matrix(self.fc.ring, 0, 0)
        if r <= 0:
            return self.fc.filt(s, t, level)
        key = (s, t, level, r)
        hit = self._z.get(key)
        if hit is not None:
            return hit
        G = self.fc.filt(s, t, level)
        d = self.fc.dmat(s, t)
        if d.nrows == 0 or d.is_zero():
            self._z[key] = G
            return G
        H = self.fc.filt(s + 1, t, level + r)
        dG = Matrix(self.fc.ring, d.nrows, G.ncols,
                    [d.mulvec(G.col(j)) for j in range(G.ncols)])
        ker = kernel_basis(hstack(dG, H))
        cols = []
        for k in ker:
            u = {j: c for j, c in k.items() if j < G.ncols}
            v = G.mulvec(u)
            if v:
                cols.append(v)
        out = Matrix(self.fc.ring, n, len(cols), cols)
        self._z[key] = out
        return out

    def _denominator(self, s, t, level, r):
        parts = [self.zr(s, t, level + 1, r - 1)]
        if s > self.fc.s_lo:
            src = self.zr(s - 1, t, level - r + 1, r - 1)
            if src.ncols:
                d = self.fc.dmat(s - 1, t)
                cols = [d.mulvec(src.col(j)) for j in range(src.ncols)]
                parts.append(Matrix(self.fc.ring, self.fc.dim(s, t),
                                    len(cols), cols))
        return hstack(*parts) if any(p.ncols for p in parts) else \
            Matrix(self.fc.ring, self.fc.dim(s, t), 0)

    def page_module(self, s, t, level, r):
        """QuotientStructure of E_r at one engine spot, or None if zero."""
        key = (s, t, level, r)
        if key in self._dead:
            return None
        hit = self._pm.get(key)
        if hit is not None or key in self._pm:
            return hit
        n = self.fc.dim(s, t)
        if n == 0 or level > self.fc.level_max + self.r_limit + 1:
            self._pm[key] = None
            return None
        if r > 1 and self.page_module(s, t, level, r - 1) is None:
            # pages shrink spotwise, so a dead spot stays dead
            self._dead.add(key)
            self._pm[key] = None
            return None
        numer = self.zr(s, t, level, r)
        if numer.ncols == 0:
            self._pm[key] = None
            return None
        denom = self._denominator(s, t, level, r)
        quot = subquotient_structure(numer, denom)
        if quot.free_rank:
            raise AxiomViolation(
                "page module has a free summand at (%d,%d,%d) page %d"
                % (s, t, level, r))
        if any(int(d) != self.fc.p for d in quot.torsion):
            raise AxiomViolation(
                "page module has torsion beyond p at (%d,%d,%d) page %d"
                % (s, t, level, r))
        if not quot.torsion:
            self._pm[key] = None
            return None
        self._pm[key] = quot
        return quot

    def dim(self, s, t, level, r):
        q = self.page_module(s, t, level, r)
        return 0 if q is None else len(q.torsion)

    def permanent_lattice(self, s, t, level):
        """Representatives whose differential lies in the relation span."""
        n = self.fc.dim(s, t)
        if n == 0:
            return Matrix(self.fc.ring, 0, 0)
        key = (s, t, level, "perm")
        hit = self._z.get(key)
        if hit is not None:
            return hit
        G = self.fc.filt(s, t, level)
        d = self.fc.dmat(s, t)
        rel = self.fc.relmat(s + 1, t)
        if d.nrows == 0 or d.is_zero():
            self._z[key] = G
            return G
        if rel is None or rel.ncols == 0:
            rel = Matrix(self.fc.ring, d.nrows, 0)
        dG = Matrix(self.fc.ring, d.nrows, G.ncols,
                    [d.mulvec(G.col(j)) for j in range(G.ncols)])
        ker = kernel_basis(hstack(dG, rel))
        cols = []
        for k in ker:
            u = {j: c for j, c in k.items() if j < G.ncols}
            v = G.mulvec(u)
            if v:
                cols.append(v)
        out = Matrix(self.fc.ring, n, len(cols), cols)
        self._z[key] = out
        return out

    def is_permanent(self, s, t, level, r, vec):
        """Whether some representative of the class has d inside relations."""
        span = hstack(self.permanent_lattice(s, t, level),
                      self._denominator(s, t, level, r))
        return lattice_contains(span, vec)


# ---------------------------------------------------------------------------
# descent (cosimplicial) complex
# ---------------------------------------------------------------------------

class DescentComplex:
    """Totalization model for the resolved completion tower of a comodule.

    The ground ring is completed along the augmentation ideal
    I = (p, v1, ...) by the coface tower whose level n smashes the
    comodule with n + 1 copies of the quotient by I.  Each copy is
    replaced by its Koszul resolution, so a chain word

        (V, Ts, esets, gi)

    holds a base monomial V, a tuple Ts of Gamma-positive cobar letters,
    a tuple esets of n + 1 sorted sets of Koszul letter indices (one set
    per copy; index 0 is the degree-zero letter contracting to p, index
    i >= 1 contracts to v_i), and a module generator index.  The last
    copy is the coefficient copy; the others are reduced and must stay
    nonempty.  Words with an empty reduced copy span the image of the
    unit cofaces, and every differential preserves that span, so the
    engine works in quotient coordinates and simply drops such words.

    Blocks sit at (n, s, t) with n the level and s the display degree
    len(Ts) + n - (letter count).  The display weight is w = n + s, so
    the r-th page differential moves (s, t, w) to (s+1, t, w+r), the
    same dictionary the ideal-power construction uses.  The vertical
    differential (cobar faces plus the signed contraction) preserves n;
    the horizontal differential is the single coface surviving the
    quotient, which turns the coefficient copy into a reduced copy and
    starts a fresh empty coefficient copy.
    """

    definition = "cosimplicial"

    def __init__(self, h, M, caps, check=True, pad=0):
        if h.ring.is_field:
            raise UnsupportedPresentation(
                "the level filtration needs an honest ideal; got a field "
                "coefficient ring")
        if M.hopf is not h:
            raise RingMismatch("comodule lives over a different algebroid")
        caps = Caps.coerce(caps)
        if h.cap < caps.t_max:
            raise CapMismatch(
                "hopf algebroid truncated at degree %d cannot chart t <= %d"
                % (h.cap, caps.t_max))
        if caps.w_max is None:
            # weights past s_max + 2 change nothing in the displayed rows
            caps = Caps(caps.s_max, caps.t_max, caps.s_max + 2)
        self.h = h
        self.M = M
        self.ring = h.ring
        self.caps = caps
        self.pad = pad
        self.n_max = caps.w_max + pad
        self.s_lo = -1
        self.s_hi = caps.s_max + 1
        self.kgens = _koszul_generators(h, caps.t_max)
        self._kdeg = [g[2] for g in self.kgens]
        self._min_gdeg = 0
        for d in range(1, caps.t_max + 1):
            if basis_in_degree(h.alphabet, d, subset=h.g_names):
                self._min_gdeg = d
                break
        self._lsets = {}
        self._eopts = {}
        self._tmemo = {}
        self._block = {}
        self._bindex = {}
        self._vmat = {}
        self._hmat = {}
        self._rel = {}
        self._nonempty = bool(M.generators)
        self._combos = {}
        self._corr_sign = self.ring.coerce(-1)
        self._kcoact = self._solve_witnesses()
        for t in range(0, caps.t_max + 1):
            for n in range(0, self.n_max + 2):
                for s in range(self.s_lo, self.s_hi + 2):
                    self._enumerate_block(n, s, t)
        for t in range(0, caps.t_max + 1):
            for n in range(0, self.n_max + 2):
                for s in range(self.s_lo, self.s_hi + 1):
                    if self.block(n, s, t):
                        self._build_vmat(n, s, t)
                        if n <= self.n_max:
                            self._build_hmat(n, s, t)
        if check:
            self.check_d2()

    # -- enumeration --------------------------------------------------------

    def _letter_sets(self, d, start=0):
        """Sorted index tuples of distinct Koszul letters of total degree d."""
        key = (d, start)
        hit = self._lsets.get(key)
        if hit is not None:
            return hit
        out = [] if d > 0 else [()]
        for k in range(start, len(self.kgens)):
            dk = self._kdeg[k]
            if dk > d:
                continue
            for rest in self._letter_sets(d - dk, k + 1):
                out.append((k,) + rest)
        out = sorted(set(out))
        self._lsets[key] = out
        return out

    def _twords(self, sp, d):
        """Tuples of sp Gamma-positive letters with total degree d."""
        key = (sp, d)
        hit = self._tmemo.get(key)
        if hit is not None:
            return hit
        if sp == 0:
            out = [()] if d == 0 else []
        else:
            out = []
            for d1 in range(1, d + 1):
                for T in basis_in_degree(self.h.alphabet, d1,
                                         subset=self.h.g_names):
                    for rest in self._twords(sp - 1, d - d1):
                        out.append((T,) + rest)
        self._tmemo[key] = out
        return out

    def _esets_options(self, n, j, d):
        """Letter distributions: n nonempty reduced copies plus the last."""
        key = (n, j, d)
        hit = self._eopts.get(key)
        if hit is not None:
            return hit
        out = []
        if j >= 0 and d >= 0:
            if n == 0:
                for S in self._letter_sets(d):
                    if len(S) == j:
                        out.append((S,))
            else:
                for d1 in range(0, d + 1):
                    for S in self._letter_sets(d1):
                        if not S or len(S) > j:
                            continue
                        for rest in self._esets_options(
                                n - 1, j - len(S), d - d1):
                            out.append((S,) + rest)
        self._eopts[key] = out
        return out

    def _enumerate_block(self, n, s, t):
        key = (n, s, t)
        if key in self._block:
            return
        h, M = self.h, self.M
        cap_j = (n + 1) * len(self.kgens)
        words = []
        for gi, g in enumerate(M.generators):
            rem0 = t - g.degree
            if rem0 < 0:
                continue
            for dV in range(0, rem0 + 1):
                for V in basis_in_degree(h.alphabet, dV, subset=h.a_names):
                    rem1 = rem0 - dV
                    sp_cap = rem1 // self._min_gdeg if self._min_gdeg else 0
                    for sp in range(max(0, s), sp_cap + 1):
                        j = sp + n - s
                        if j > cap_j:
                            break
                        for dT in range(0, rem1 + 1):
                            for Ts in self._twords(sp, dT):
                                for esets in self._esets_options(
                                        n, j, rem1 - dT):
                                    words.append((V, Ts, esets, gi))
        self._block[key] = words
        self._bindex[key] = {w: i for i, w in enumerate(words)}

    def block(self, n, s, t):
        return self._block.get((n, s, t), [])

    def bindex(self, n, s, t):
        return self._bindex.get((n, s, t), {})

    def block_dim(self, n, s, t):
        return len(self.block(n, s, t))

    def machine_key(self, s, t, w):
        """Block key for the displayed tridegree."""
        return (w - s, s, t)

    # -- resolved-coefficient coaction ---------------------------------------

    def _solve_witnesses(self):
        """Coaction witnesses for the Koszul letters.

        The letters resolve the residue field of the base ring, so the
        letter for the i-th ideal generator cannot coact primitively:
        the chain condition forces corrections by lower letters,
        weighted by expressions of eta_R(v_i) - v_i inside the ideal.
        Witnesses are found degreewise by a linear solve, with
        coassociativity imposed as part of the system so the coaction
        face squares to zero on the nose.
        """
        h, ring = self.h, self.ring
        alph = h.alphabet
        out = {}
        for i in range(1, len(self.kgens)):
            v_mono, _, d_i = self.kgens[i]
            cols = []
            for k in range(i):
                d_k = self._kdeg[k]
                for m in basis_in_degree(alph, d_i - d_k):
                    if h._gpart(m):
                        cols.append((k, m))
            rows = {}
            colvecs = [dict() for _ in cols]
            rhs = {}

            def rix(key):
                return rows.setdefault(key, len(rows))

            def put(vec, key, val):
                r = rix(key)
                s = ring.add(vec.get(r, ring.zero), val)
                if ring.is_zero(s):
                    vec.pop(r, None)
                else:
                    vec[r] = s

            # chain condition: letters contract through the right unit, so
            # sum_k c_ik * eta_R(gen_k) = eta_R(v_i) - v_i
            for ci, (k, m) in enumerate(cols):
                gmono, scal, _ = self.kgens[k]
                for me, ce in h.eta_R_mono(gmono).terms.items():
                    hit = mono_mul(alph, m, me)
                    if hit is None:
                        continue
                    c = ring.mul(ce, ring.coerce(scal * hit[0]))
                    put(colvecs[ci], ("c", hit[1]), c)
            u = h.eta_R_mono(v_mono)
            for m, c in u.terms.items():
                if m == v_mono:
                    c = ring.add(c, ring.neg(ring.one))
                if not ring.is_zero(c):
                    put(rhs, ("c", m), c)

            # splitting the appended face content twice must match a
            # two-step correction: rdiag(c_ik) = -sum c_im (x) c_mk
            for ci, (k, m) in enumerate(cols):
                dg = h.push_left(h.reduced_diag_mono(m))
                for key, c in dg.terms.items():
                    put(colvecs[ci], ("a", k) + key, c)
                for mid in range(0, k):
                    prev = out.get((k, mid))
                    if not prev:
                        continue
                    pairs = {}
                    for pm, pc in prev.items():
                        pairs[(m, pm)] = pc
                    tp = self.h.push_left(TensorPoly(
                        ring, alph, h.cap, 2, pairs, _clean=True))
                    for key, c in tp.terms.items():
                        put(colvecs[ci], ("a", mid) + key, c)

            A = Matrix(ring, len(rows), len(cols), colvecs)
            sol = LinearSolver(A).solve(dict(rhs))
            if sol is None:
                raise CompositionNotZero(
                    "no coassociative coaction witness for the degree %d "
                    "Koszul letter" % d_i)
            for ci, val in sol.items():
                if ring.is_zero(val):
                    continue
                k, m = cols[ci]
                bucket = out.setdefault((i, k), {})
                s = ring.add(bucket.get(m, ring.zero), val)
                if ring.is_zero(s):
                    bucket.pop(m, None)
                else:
                    bucket[m] = s
        table = {}
        for (i, k), poly in out.items():
            if poly:
                table.setdefault(i, []).append((k, poly))
        return table

    def _letter_combos(self, esets):
        """Coaction expansion of the Koszul letters across all copies.

        Yields (esets', coeff, content mono, nreplaced); the content
        collects witness factors and multiplies the appended letter.
        Replacements stay inside their copy, so the resorting sign is
        computed per copy.
        """
        hit = self._combos.get(esets)
        if hit is not None:
            return hit
        ring, alph = self.ring, self.h.alphabet
        states = [((), ring.one, (), 0)]
        for S in esets:
            local = [((), ring.one, (), 0)]
            for k in S:
                nxt = []
                for targets, coeff, mono, nrep in local:
                    nxt.append((targets + (k,), coeff, mono, nrep))
                    for k2, poly in self._kcoact.get(k, ()):
                        for m2, c2 in poly.items():
                            hit = mono_mul(alph, mono, m2)
                            if hit is None:
                                continue
                            c = ring.mul(coeff, c2)
                            c = ring.mul(c, self._corr_sign)
                            if hit[0] < 0:
                                c = ring.neg(c)
                            nxt.append((targets + (k2,), c, hit[1], nrep + 1))
                local = nxt
            done = []
            for targets, coeff, mono, nrep in local:
                if len(set(targets)) != len(targets):
                    continue
                inv = 0
                for a in range(len(targets)):
                    for b in range(a + 1, len(targets)):
                        if targets[a] > targets[b]:
                            inv += 1
                if inv % 2:
                    coeff = ring.neg(coeff)
                done.append((tuple(sorted(targets)), coeff, mono, nrep))
            nstates = []
            for copies, c0, m0, n0 in states:
                for S2, c1, m1, n1 in done:
                    mm = mono_mul(alph, m0, m1)
                    if mm is None:
                        continue
                    c = ring.mul(c0, c1)
                    if mm[0] < 0:
                        c = ring.neg(c)
                    nstates.append((copies + (S2,), c, mm[1], n0 + n1))
            states = nstates
        self._combos[esets] = states
        return states

    # -- canonical emission ---------------------------------------------------

    def _accum(self, out, word, coeff):
        c = self.ring.add(out.get(word, self.ring.zero), coeff)
        if self.ring.is_zero(c):
            out.pop(word, None)
        else:
            out[word] = c

    def _is_pattern(self, word):
        esets = word[2]
        return all(esets[i] for i in range(len(esets) - 1))

    def _push_emit(self, out, V, legs, esets, gi, coeff, drop_virtual=False):
        """Push base content left, split leg 0, accumulate pattern words."""
        h, ring = self.h, self.ring
        legs = list(legs)
        if V:
            hit = mono_mul(h.alphabet, V, legs[0])
            if hit is None:
                return
            if hit[0] < 0:
                coeff = ring.neg(coeff)
            legs[0] = hit[1]
        tp = h.push_left(TensorPoly(ring, h.alphabet, h.cap, len(legs),
                                    {tuple(legs): coeff}, _clean=True))
        for key, c in tp.terms.items():
            V2, L0 = h.split_mono(key[0])
            parts = (L0,) + key[1:]
            if drop_virtual:
                if parts[-1]:
                    raise CompositionNotZero(
                        "contracted content failed to clear the letters")
                parts = parts[:-1]
            if any(not L for L in parts):
                raise CompositionNotZero(
                    "a cobar letter collapsed to the unit")
            word = (V2, parts, esets, gi)
            self._accum(out, word, c)

    # -- raw differentials ----------------------------------------------------

    def _contract_word(self, word):
        """Koszul contraction: remove one letter, multiply in its image."""
        V, Ts, esets, gi = word
        h, ring, alph = self.h, self.ring, self.h.alphabet
        out = {}
        pos = 0
        last = len(esets) - 1
        for ci, S in enumerate(esets):
            for k in S:
                sign = -1 if pos % 2 else 1
                pos += 1
                S2 = tuple(x for x in S if x != k)
                if ci < last and not S2:
                    continue
                es2 = esets[:ci] + (S2,) + esets[ci + 1:]
                gmono, scal, _ = self.kgens[k]
                c = ring.coerce(sign * scal)
                if not gmono:
                    self._accum(out, (V, Ts, es2, gi), c)
                elif Ts:
                    self._push_emit(out, V, list(Ts) + [gmono], es2, gi, c,
                                    drop_virtual=True)
                else:
                    hit = mono_mul(alph, V, gmono)
                    if hit is None:
                        continue
                    if hit[0] < 0:
                        c = ring.neg(c)
                    self._accum(out, (hit[1], (), es2, gi), c)
        return out

    def _dcobar_word(self, word):
        """Reduced cobar faces of the resolved-coefficient comodule."""
        V, Ts, esets, gi = word
        h, M, ring = self.h, self.M, self.ring
        alph = h.alphabet
        sp = len(Ts)
        out = {}
        coact = dict(M.reduced_coaction(gi))
        coact[((), gi)] = ring.one
        if sp == 0:
            for es2, cc, cmono, nrep in self._letter_combos(esets):
                for (W, gj), c in coact.items():
                    if nrep == 0 and not W and gj == gi:
                        continue
                    hit = mono_mul(alph, cmono, W)
                    if hit is None:
                        continue
                    if not hit[1]:
                        continue
                    c2 = ring.mul(cc, c)
                    if hit[0] < 0:
                        c2 = ring.neg(c2)
                    self._push_emit(out, V, [hit[1]], es2, gj, ring.neg(c2))
            if V:
                diff = {m: ring.neg(c)
                        for m, c in h.eta_R_mono(V).terms.items()}
                diff[V] = ring.add(diff.get(V, ring.zero), ring.one)
                for m, c in diff.items():
                    if not ring.is_zero(c):
                        self._push_emit(out, (), [m], esets, gi, ring.neg(c))
            return out

        legs0 = list(Ts)
        if V:
            hit = mono_mul(alph, V, Ts[0])
            if hit is None:
                return out
            legs0[0] = hit[1]
        base = tuple(legs0)
        for i in range(1, sp + 1):
            D = h.reduced_diag_mono(base[i - 1])
            neg = (i % 2 == 1)
            for (L, R), c in D.terms.items():
                if neg:
                    c = ring.neg(c)
                self._push_emit(out, (), base[:i - 1] + (L, R) + base[i:],
                                esets, gi, c)
        neg_last = (sp % 2 == 0)
        for es2, cc, cmono, nrep in self._letter_combos(esets):
            for (W, gj), c in coact.items():
                if nrep == 0 and not W and gj == gi:
                    continue
                hit = mono_mul(alph, cmono, W)
                if hit is None:
                    continue
                if not hit[1]:
                    continue
                c2 = ring.mul(cc, c)
                if hit[0] < 0:
                    c2 = ring.neg(c2)
                if neg_last:
                    c2 = ring.neg(c2)
                self._push_emit(out, (), base + (hit[1],), es2, gj, c2)
        return out

    def _append_word(self, word):
        """The surviving coface: retire the coefficient copy."""
        V, Ts, esets, gi = word
        if not esets[-1]:
            return {}
        return {(V, Ts, esets + ((),), gi): self.ring.one}

    # -- signed assembly ------------------------------------------------------

    def _vbar_word(self, word):
        out = self._dcobar_word(word)
        ring = self.ring
        neg = len(word[1]) % 2 == 1
        for w2, c in self._contract_word(word).items():
            self._accum(out, w2, ring.neg(c) if neg else c)
        return out

    def _hbar_word(self, word):
        V, Ts, esets, gi = word
        out = self._append_word(word)
        n = len(esets) - 1
        j = sum(len(S) for S in esets)
        if (len(Ts) + j + n + 1) % 2:
            out = {w: self.ring.neg(c) for w, c in out.items()}
        return out

    # -- matrices -------------------------------------------------------------

    def _column(self, terms, index, what):
        col = {}
        for w, c in terms.items():
            row = index.get(w)
            if row is None:
                raise CompositionNotZero(
                    "%s leaves the enumerated blocks at %r" % (what, w))
            col[row] = c
        return col

    def _build_vmat(self, n, s, t):
        here = self.block(n, s, t)
        index = self.bindex(n, s + 1, t)
        cols = [self._column(self._vbar_word(w), index, "the level-fixing "
                             "differential") for w in here]
        self._vmat[(n, s, t)] = Matrix(
            self.ring, self.block_dim(n, s + 1, t), len(cols), cols)

    def _build_hmat(self, n, s, t):
        here = self.block(n, s, t)
        index = self.bindex(n + 1, s + 1, t)
        cols = [self._column(self._hbar_word(w), index, "the level-raising "
                             "coface") for w in here]
        self._hmat[(n, s, t)] = Matrix(
            self.ring, self.block_dim(n + 1, s + 1, t), len(cols), cols)

    def vmat(self, n, s, t):
        m = self._vmat.get((n, s, t))
        if m is None:
            m = Matrix.zeros(self.ring, self.block_dim(n, s + 1, t),
                             self.block_dim(n, s, t))
        return m

    def hmat(self, n, s, t):
        m = self._hmat.get((n, s, t))
        if m is None:
            m = Matrix.zeros(self.ring, self.block_dim(n + 1, s + 1, t),
                             self.block_dim(n, s, t))
        return m

    def relmat(self, n, s, t):
        """Relation span of the block, or None for a free comodule."""
        if not self.M.relations:
            return None
        key = (n, s, t)
        hit = self._rel.get(key)
        if hit is not None:
            return hit
        h = self.h
        ring = self.ring
        index = self.bindex(n, s, t)
        structures = sorted({(w[1], w[2]) for w in self.block(n, s, t)})
        cols = []
        for Ts, esets in structures:
            used = (sum(h.alphabet.mono_degree(T) for T in Ts)
                    + sum(self._kdeg[k] for S in esets for k in S))
            for rel in self.M.relations:
                rdeg = None
                for (m, gi), c in rel.items():
                    rdeg = (h.alphabet.mono_degree(m)
                            + self.M.generators[gi].degree)
                    break
                rem = t - used - rdeg
                if rem < 0:
                    continue
                for u in basis_in_degree(h.alphabet, rem, subset=h.a_names):
                    col = {}
                    dead = False
                    for (m, gi), c in rel.items():
                        hit2 = mono_mul(h.alphabet, u, m)
                        if hit2 is None:
                            continue
                        if hit2[0] < 0:
                            c = ring.neg(c)
                        row = index.get((hit2[1], Ts, esets, gi))
                        if row is None:
                            dead = True
                            break
                        col[row] = ring.add(col.get(row, ring.zero), c)
                    if dead or not col:
                        continue
                    cols.append({r: c for r, c in col.items()
                                 if not ring.is_zero(c)})
        out = Matrix(ring, len(index), len(cols), cols)
        self._rel[key] = out
        return out

    def _residual_ok(self, n, s, t, cols):
        rel = self.relmat(n, s, t)
        if rel is None or rel.ncols == 0:
            return all(not c for c in cols)
        solver = LinearSolver(rel)
        for c in cols:
            if c and solver.solve(dict(c)) is None:
                return False
        return True

    def check_d2(self):
        """Exactness of the square: both composites vanish mod relations."""
        for (n, s, t), m in sorted(self._vmat.items()):
            if m.ncols == 0:
                continue
            up = self._vmat.get((n, s + 1, t))
            if up is not None:
                vv = up.mul(m)
                if not self._residual_ok(n, s + 2, t, vv.cols):
                    raise CompositionNotZero(
                        "the level-fixing differential fails to square to "
                        "zero at block (%d, %d, %d)" % (n, s, t))
            hm = self._hmat.get((n, s, t))
            if hm is None:
                continue
            hv = self._hmat.get((n, s + 1, t))
            vu = self._vmat.get((n + 1, s + 1, t))
            zero = [dict() for _ in range(hm.ncols)]
            a_cols = hv.mul(m).cols if hv is not None else zero
            b_cols = vu.mul(hm).cols if vu is not None else zero
            mixed = []
            for a, b in zip(a_cols, b_cols):
                col = dict(a)
                for r, c in b.items():
                    x = self.ring.add(col.get(r, self.ring.zero), c)
                    if self.ring.is_zero(x):
                        col.pop(r, None)
                    else:
                        col[r] = x
                mixed.append(col)
            if not self._residual_ok(n + 1, s + 2, t, mixed):
                raise CompositionNotZero(
                    "the coface fails to anticommute with the level-fixing "
                    "differential at block (%d, %d, %d)" % (n, s, t))

    # -- labels ---------------------------------------------------------------

    def _letter_tag(self, k):
        gmono, _, _ = self.kgens[k]
        if not gmono:
            return "ep"
        return "e" + self.h.alphabet.names[gmono[0][0]]

    def word_label(self, word):
        V, Ts, esets, gi = word
        h = self.h
        bits = []
        if V:
            bits.append(h.alphabet.render_mono(V))
        if Ts:
            bits.append("[" + "|".join(h.alphabet.render_mono(T)
                                       for T in Ts) + "]")
        for S in esets:
            bits.append("(" + ",".join(self._letter_tag(k) for k in S) + ")")
        bits.append(self.M.generators[gi].name)
        return "·".join(bits)


# ---------------------------------------------------------------------------
# staircase pages of the descent complex
# ---------------------------------------------------------------------------

UNDETERMINED = type("_Undetermined", (), {
    "__repr__": lambda self: "UNDETERMINED",
    "__bool__": lambda self: False})()


class _DescentPages:
    """Level-filtration pages of a descent complex, blockwise.

    The totalization carries one chain block per (level, row) and two
    differential legs: Dv fixes the level, Dh raises it by one.  A class
    at display spot (s, t, w) lives in the block at level w - s; it
    survives to page r when its head extends to a zigzag of stage r - 1,
    and d_r reads off the coface of the last tail.  Packs store (head,
    last tail) pairs only, because the staircase conditions couple
    adjacent tails and intermediates never enter again; each extension
    is one tracked kernel over Z/p^K through the fpmat kit, and every
    stage keeps zero-head zigzags so the pair lattice stays complete.

    Blocks past the level cap truncate the tower, so differentials that
    would read a coface beyond it are undetermined unless every survivor
    carries a permanence certificate (a zigzag whose next coface already
    lies in the relation span; such a zigzag extends by zeros forever,
    independent of the truncation).
    """

    definition = "cosimplicial"

    def __init__(self, dc, ctx):
        self.dc = dc
        self.ctx = ctx
        self.p = dc.h.prime
        self.caps = dc.caps
        self.r_limit = dc.n_max + 1
        self._dense = {}
        self._ech = {}
        self._relimg = {}
        self._packs = {}
        self._certs = {}
        self._bb = {}
        self._page = {}
        self._seal = {}
        self._pflags = {}
        self._sflags = {}
        self._einf = {}
        self._diff = {}

    # dense block matrices ------------------------------------------------

    def _mat(self, kind, n, s, t):
        key = (kind, n, s, t)
        hit = self._dense.get(key)
        if hit is None:
            if kind == "v":
                m = self.dc.vmat(n, s, t)
            elif kind == "h":
                m = self.dc.hmat(n, s, t)
            else:
                m = self.dc.relmat(n, s, t)
                if m is None:
                    m = Matrix(self.dc.ring, self.dc.block_dim(n, s, t), 0)
            hit = self.ctx.to_dense(m.nrows, m.cols)
            self._dense[key] = hit
        return hit

    def _block_ech(self, n, s, t):
        """Tracked echelon of [Dv | rel] at one block, cached."""
        key = (n, s, t)
        hit = self._ech.get(key)
        if hit is None:
            dv = self._mat("v", n, s, t)
            rel = self._mat("r", n, s + 1, t)
            hit = col_echelon(np.hstack([dv, rel]), self.ctx, track=True)
            self._ech[key] = hit
        return hit

    def _rel_image(self, n, s, t):
        """Echelon basis of the relation span of one block, with depth."""
        key = (n, s, t)
        hit = self._relimg.get(key)
        if hit is None:
            rel = self._mat("r", n, s, t)
            if rel.shape[1]:
                e = col_echelon(rel, self.ctx)
                hit = (e.image(), e.depth)
            else:
                hit = (rel, 0)
            self._relimg[key] = hit
        return hit

    # pack plumbing --------------------------------------------------------

    def _prune(self, stacked, depth):
        """Echelon basis of a dense column span, with its read depth.

        The elimination stops at the junk floor, so saturation columns
        of mod p^K kernels never survive into later stages.
        """
        if stacked.shape[1] == 0:
            return stacked, depth
        e = col_echelon(stacked, self.ctx, depth=depth)
        return e.image().copy(), e.depth

    def _member_kernel(self, basis, C, depth):
        """Combos lam with C @ lam inside span(basis), with depth."""
        q = C.shape[1]
        if q == 0:
            return np.zeros((0, 0), dtype=np.int64), depth
        b = basis.shape[1]
        e = col_echelon(np.hstack([basis, C]) if b else C, self.ctx,
                        track=True, depth=depth)
        return e.kernel()[b:, :], e.depth

    def kpack_max(self, s, w):
        """Largest honest zigzag stage at a spot: both legs must exist."""
        return self.dc.n_max + 2 - (w - s)

    def pack(self, s, t, w, k):
        """(heads, lasts, depth) spanning stage-k zigzag ends at one spot."""
        n0 = w - s
        packs = self._packs.get((s, t, w))
        if packs is None:
            dim = self.dc.block_dim(n0, s, t)
            ech = self._block_ech(n0, s, t)
            ker = ech.kernel()[:dim, :]
            pair, d = self._prune(np.vstack([ker, ker]), ech.depth)
            packs = [(pair[:dim], pair[dim:], d)]
            self._packs[(s, t, w)] = packs
        while len(packs) < k:
            i = len(packs)
            H, L, d = packs[-1]
            b = n0 + i
            dv = self._mat("v", b, s, t)
            rel = self._mat("r", b, s + 1, t)
            coface = self.ctx.matmul(self._mat("h", b - 1, s, t), L)
            dim = dv.shape[1]
            e = col_echelon(np.hstack([dv, coface, rel]), self.ctx,
                            track=True, depth=d)
            K = e.kernel()
            lam = K[dim:dim + H.shape[1], :]
            lasts = K[:dim, :]
            heads = self.ctx.matmul(H, lam)
            pair, d2 = self._prune(np.vstack([heads, lasts]), e.depth)
            packs.append((pair[:H.shape[0]], pair[H.shape[0]:], d2))
        return packs[k - 1]

    def cert_heads(self, s, t, w):
        """Heads certified as cycles forever: some zigzag's coface is zero.

        Certificates accumulate stage by stage while the coface leg is
        still represented; each one extends its zigzag by zeros forever,
        which no truncation can disturb.  Returns (heads, depth).
        """
        n0 = w - s
        hit = self._certs.get((s, t, w))
        if hit is None:
            dim = self.dc.block_dim(n0, s, t)
            acc = np.zeros((dim, 0), dtype=np.int64)
            dmax = 0
            for k in range(1, self.dc.n_max + 2 - n0):
                H, L, d = self.pack(s, t, w, k)
                if H.shape[1] == 0:
                    continue
                coface = self.ctx.matmul(self._mat("h", n0 + k - 1, s, t), L)
                rimg, drel = self._rel_image(n0 + k, s + 1, t)
                lam, d2 = self._member_kernel(rimg, coface, max(d, drel))
                if lam.shape[1]:
                    acc = np.hstack([acc, self.ctx.matmul(H, lam)])
                    dmax = max(dmax, d2)
            hit = self._prune(acc, dmax)
            self._certs[(s, t, w)] = hit
        return hit

    # denominators and page modules ----------------------------------------

    def _bbasis(self, s, t, w, r):
        """Boundary generators of the page-r denominator, with depth."""
        key = (s, t, w, r)
        hit = self._bb.get(key)
        if hit is not None:
            return hit
        n0 = w - s
        if r == 1:
            out = self._prune(self._mat("r", n0, s, t), 0)
        else:
            prev, dprev = self._bbasis(s, t, w, r - 1)
            new, dnew = None, 0
            if r == 2:
                if s - 1 >= self.dc.s_lo and self.dc.block_dim(n0, s - 1, t):
                    new = self._mat("v", n0, s - 1, t)
            else:
                j = r - 2
                if s - 1 >= self.dc.s_lo and n0 - j >= 0 and \
                        self.dc.block_dim(n0 - j, s - 1, t):
                    L, dnew = self.pack(s - 1, t, w - j - 1, j)[1:]
                    if L.shape[1]:
                        new = self.ctx.matmul(
                            self._mat("h", n0 - 1, s - 1, t), L)
            if new is None or new.shape[1] == 0:
                out = (prev, dprev)
            else:
                out = self._prune(np.hstack([prev, new]), max(dprev, dnew))
        self._bb[key] = out
        return out

    def page(self, s, t, w, r):
        """Page module at a display spot: PKQuotient, None, or undetermined.

        Numerators come from zigzag heads while the pack stages are
        represented; past that, a spot whose survivors were all
        certified keeps its certificate span as numerator, and anything
        else is undetermined.
        """
        key = (s, t, w, r)
        if key in self._page:
            return self._page[key]
        n0 = w - s
        dim = self.dc.block_dim(n0, s, t)
        out = None
        if dim:
            prev = self.page(s, t, w, r - 1) if r > 1 else True
            if prev is UNDETERMINED:
                out = UNDETERMINED
            elif prev is not None:
                dH = 0
                if r == 1:
                    H = np.eye(dim, dtype=np.int64)
                elif r - 1 <= self.kpack_max(s, w):
                    H, _, dH = self.pack(s, t, w, r - 1)
                else:
                    seal = self._seal.get((s, t, w))
                    if seal is not None and seal < r:
                        H, dH = self.cert_heads(s, t, w)
                    else:
                        H = None
                if H is None:
                    out = UNDETERMINED
                else:
                    B, dB = self._bbasis(s, t, w, r)
                    # boundaries are zigzag heads themselves, so the pack
                    # span already contains them; only the certificate
                    # numerator of a sealed spot needs them adjoined
                    sealed = r > 1 and r - 1 > self.kpack_max(s, w)
                    N = np.hstack([H, B]) if sealed else H
                    quot = subquotient_pk(N, B, self.ctx,
                                          "(%d,%d,%d) page %d" % (s, t, w, r),
                                          depth=max(dH, dB))
                    out = None if quot.is_trivial else quot
        self._page[key] = out
        if out is not None and out is not UNDETERMINED:
            cyc = self._perm_flags(s, t, w, r, out)
            self._pflags[key] = cyc
            self._sflags[key] = self._surv_flags(s, t, w, out, cyc)
        return out

    def binf(self, s, t, w):
        """Stabilized boundary span: sources below block zero are empty."""
        return self._bbasis(s, t, w, (w - s) + 2)

    def einf_quot(self, s, t, w):
        """Stable quotient at a spot: certified heads over all boundaries.

        Equals the limiting page once the spot is sealed; before that it
        still decides the fate of any certified class, because such a
        class dies only by falling into the stabilized boundary span.
        """
        key = (s, t, w)
        hit = self._einf.get(key, False)
        if hit is False:
            certs, dC = self.cert_heads(s, t, w)
            B, dB = self.binf(s, t, w)
            quot = subquotient_pk(np.hstack([certs, B]), B, self.ctx,
                                  "(%d,%d,%d) stable" % (s, t, w),
                                  depth=max(dC, dB))
            hit = None if quot.is_trivial else quot
            self._einf[key] = hit
        return hit

    def _surv_flags(self, s, t, w, quot, cyc):
        """Display permanence: certified and clear of every later boundary."""
        reps = quot.free_reps + quot.torsion_reps
        einf = self.einf_quot(s, t, w)
        flags = []
        for j, rep in enumerate(reps):
            ok = bool(cyc[j]) and einf is not None
            if ok:
                free, tors = einf.class_coordinates(rep, depth=quot.depth)
                ok = any(free) or any(tors)
            flags.append(ok)
        return flags

    def _perm_flags(self, s, t, w, r, quot):
        """Per-basis certified-cycle flags, sealing the spot when all hold.

        A basis class is a certified cycle when its coordinate vector
        lies in the exact span of the certified classes inside the page
        module, cyclic orders included.  Such a class supports no
        differential on this or any later page, though it may still be
        hit by one.
        """
        certs, dC = self.cert_heads(s, t, w)
        dim = quot.mod_p_dim
        cols = []
        for j in range(certs.shape[1]):
            free, tors = quot.class_coordinates(
                self.ctx.to_sparse(certs[:, j]), depth=dC)
            cols.append(free + tors)
        span = np.array(cols, dtype=np.int64).T if cols else \
            np.zeros((dim, 0), dtype=np.int64)
        orders = quot.orders()
        mods = np.zeros((dim, 0), dtype=np.int64)
        diag = [i for i, o in enumerate(orders) if o]
        if diag:
            mods = np.zeros((dim, len(diag)), dtype=np.int64)
            for c, i in enumerate(diag):
                mods[i, c] = orders[i]
        ech = col_echelon(np.hstack([span, mods]), self.ctx,
                          depth=max(dC, quot.depth))
        probe = np.eye(dim, dtype=np.int64)
        flags = [bool(x) for x in ech.member(probe)]
        if all(flags) and (s, t, w) not in self._seal:
            self._seal[(s, t, w)] = r
        return flags

    def perm_flags(self, s, t, w, r):
        return self._pflags.get((s, t, w, r))

    def surv_flags(self, s, t, w, r):
        return self._sflags.get((s, t, w, r))

    # differentials ----------------------------------------------------------

    def diff(self, s, t, w, r):
        """d_r data leaving one spot: dict, None when zero, or undetermined.

        The dict carries the dense matrix of target class coordinates
        (None when the target page itself is undetermined) and the rank
        of the map, measured as independent hits modulo the target
        boundary span so it stays meaningful either way.
        """
        key = (s, t, w, r)
        if key in self._diff:
            return self._diff[key]
        out = self._diff_inner(s, t, w, r)
        self._diff[key] = out
        return out

    def _diff_inner(self, s, t, w, r):
        n0 = w - s
        quot = self.page(s, t, w, r)
        if quot is None or quot is UNDETERMINED:
            return None if quot is None else UNDETERMINED
        flags = self.perm_flags(s, t, w, r)
        if all(flags):
            return None
        if r > 1 and n0 + r - 2 > self.dc.n_max:
            return UNDETERMINED
        if r == 1:
            dv = self._mat("v", n0, s, t)
            reps = quot.free_reps + quot.torsion_reps
            vals = self.ctx.matmul(dv, self.ctx.to_dense(dv.shape[1], reps))
            dvals = quot.depth
        else:
            H, L, dP = self.pack(s, t, w, r - 1)
            hm = self._mat("h", n0 + r - 2, s, t)
            Z = np.array(quot.rep_combos, dtype=np.int64).T[:H.shape[1], :]
            vals = self.ctx.matmul(hm, self.ctx.matmul(L, Z))
            dvals = max(dP, quot.depth)
        if not vals.any():
            return None
        tgt = (s + 1, t, w + r)
        bb, dbb = self._bbasis(tgt[0], t, tgt[2], r)
        # the boundary basis is already echelon-reduced, so its rank is
        # its width and the union echelon prices only the new columns
        both = col_echelon(np.hstack([bb, vals]), self.ctx,
                           depth=max(dbb, dvals)).rank
        rank = both - bb.shape[1]
        if rank == 0:
            return None
        tq = self.page(tgt[0], t, tgt[2], r)
        if tq is None:
            raise PrecisionLoss(
                "nonzero differential into a trivial page at (%d,%d,%d) "
                "page %d" % (tgt[0], t, tgt[2], r))
        matrix = None
        if tq is not UNDETERMINED:
            matrix = []
            for j in range(vals.shape[1]):
                free, tors = tq.class_coordinates(
                    self.ctx.to_sparse(vals[:, j]), depth=dvals)
                matrix.append(free + tors)
        return {"target": tgt, "matrix": matrix, "rank": rank}

    # labels and display ------------------------------------------------------

    def vector_label(self, n, s, t, rep):
        if not rep:
            return "0"
        i = min(rep)
        c = rep[i]
        val = 0
        num = abs(c.numerator if hasattr(c, "numerator") else int(c))
        while num and num % self.p == 0:
            num //= self.p
            val += 1
        text = self.dc.word_label(self.dc.block(n, s, t)[i])
        if val:
            q = "q0" if val == 1 else "q0^%d" % val
            return "%s %s" % (q, text)
        return text

    def page_data(self, s, t, w, r):
        quot = self.page(s, t, w, r)
        if quot is None or quot is UNDETERMINED:
            return quot
        n0 = w - s
        reps = quot.free_reps + quot.torsion_reps
        return {
            "dim": quot.mod_p_dim,
            "orders": quot.orders(),
            "labels": [self.vector_label(n0, s, t, rep) for rep in reps],
            "permanent": self.surv_flags(s, t, w, r),
            "reps": reps,
        }

    def diff_data(self, s, t, w, r):
        return self.diff(s, t, w, r)

    def display_spots(self, t):
        out = []
        for s in range(0, self.caps.s_max + 1):
            for n in range(0, self.caps.w_max - s + 1):
                if self.dc.block_dim(n, s, t):
                    out.append((s, n + s))
        return out

    def settled(self, s, t, w):
        """True when the spot's fate is pinned for every later page."""
        for r in range(1, self.r_limit + 1):
            quot = self.page(s, t, w, r)
            if quot is UNDETERMINED:
                return False
            if quot is None:
                return True
        return (s, t, w) in self._seal and self._seal[(s, t, w)] <= self.r_limit
