"""Hopf algebroids of cooperations over a truncated polynomial range.

Builds the pair (A, Gamma) for Brown-Peterson cooperations at a prime p
and the dual Steenrod algebra, with all structure maps tabulated on
generators up to a hard internal-degree cap and extended multiplicatively
on demand (memoised).  Base generators are listed before the Gamma-only
generators in every alphabet; canonical tensors keep base-ring action on
the leftmost leg only.
"""

from fractions import Fraction

from .errors import (AlphabetMismatch, AxiomViolation, CapMismatch,
                     CapTooSmall, ParseError, RingMismatch)
from .poly import (Alphabet, Poly, basis_in_degree, mono_mul, parse_term,
                   render_coeff, split_signed_terms)

__all__ = [
    "TensorPoly", "HopfAlgebroid", "AxiomReport", "AugmentationIdeal",
    "build_bp", "build_dual_steenrod", "build_quotient_P",
    "check_axioms", "ideal_power_basis", "ideal_gr_basis",
    "dump_hopf", "load_hopf",
]


class TensorPoly:
    """Sum of elementary tensors with a fixed number of legs.

    Terms map a tuple of monomials (one per leg) to a scalar.  The degree
    cap bounds the total internal degree across all legs; products drop
    terms above it, mirroring Poly.
    """

    __slots__ = ("ring", "alphabet", "cap", "legs", "terms")

    def __init__(self, ring, alphabet, cap, legs, terms, _clean=False):
        self.ring = ring
        self.alphabet = alphabet
        self.cap = int(cap)
        self.legs = int(legs)
        if not _clean:
            clean = {}
            for key, c in terms.items():
                key = tuple(tuple(tuple(p) for p in leg) for leg in key)
                if len(key) != self.legs:
                    raise ValueError("term has %d legs, expected %d"
                                     % (len(key), self.legs))
                for leg in key:
                    if not alphabet.mono_valid(leg):
                        raise ValueError("invalid monomial %r" % (leg,))
                if self.term_degree(key) > self.cap:
                    raise CapTooSmall("tensor term exceeds cap %d" % self.cap)
                c = ring.coerce(c)
                if not ring.is_zero(c):
                    clean[key] = c
            terms = clean
        self.terms = terms

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, ring, alphabet, cap, legs):
        return cls(ring, alphabet, cap, legs, {}, _clean=True)

    @classmethod
    def unit(cls, ring, alphabet, cap, legs):
        return cls(ring, alphabet, cap, legs, {((),) * legs: ring.one},
                   _clean=True)

    @classmethod
    def of_polys(cls, polys):
        """Elementary tensor p1 (x) p2 (x) ... expanded out."""
        first = polys[0]
        ring, alph, cap = first.ring, first.alphabet, first.cap
        out = cls.unit(ring, alph, cap, 0)
        for p in polys:
            if p.ring != ring:
                raise RingMismatch("tensor legs over different rings")
            if p.alphabet != alph:
                raise AlphabetMismatch("tensor legs over different alphabets")
            if p.cap != cap:
                raise CapMismatch("tensor legs with different caps")
            terms = {}
            for key, c in out.terms.items():
                for mono, c2 in p.terms.items():
                    prod = ring.mul(c, c2)
                    if not ring.is_zero(prod):
                        terms[key + (mono,)] = prod
            out = cls(ring, alph, cap, out.legs + 1, terms, _clean=True)
        out._drop_overflow()
        return out

    def _drop_overflow(self):
        bad = [k for k in self.terms if self.term_degree(k) > self.cap]
        for k in bad:
            del self.terms[k]

    # -- helpers --------------------------------------------------------------

    def term_degree(self, key):
        return sum(self.alphabet.mono_degree(leg) for leg in key)

    def term_sort_key(self, key):
        return tuple(self.alphabet.mono_sort_key(leg) for leg in key)

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch("tensors over different rings")
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch("tensors over different alphabets")
        if self.cap != other.cap:
            raise CapMismatch("caps %d and %d differ" % (self.cap, other.cap))
        if self.legs != other.legs:
            raise ValueError("tensor leg counts differ")

    def is_zero(self):
        return not self.terms

    # -- linear structure ------------------------------------------------------

    def add(self, other):
        self._check(other)
        ring = self.ring
        terms = dict(self.terms)
        for k, c in other.terms.items():
            s = ring.add(terms.get(k, ring.zero), c)
            if ring.is_zero(s):
                terms.pop(k, None)
            else:
                terms[k] = s
        return TensorPoly(ring, self.alphabet, self.cap, self.legs, terms,
                          _clean=True)

    def neg(self):
        ring = self.ring
        return TensorPoly(ring, self.alphabet, self.cap, self.legs,
                          {k: ring.neg(c) for k, c in self.terms.items()},
                          _clean=True)

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        ring = self.ring
        c = ring.coerce(c)
        if ring.is_zero(c):
            return TensorPoly.zero(ring, self.alphabet, self.cap, self.legs)
        return TensorPoly(ring, self.alphabet, self.cap, self.legs,
                          {k: ring.mul(c, x) for k, x in self.terms.items()},
                          _clean=True)

    # -- multiplicative structure ----------------------------------------------

    def _term_mul(self, k1, k2):
        """Legwise product with the Koszul sign; None if a term dies."""
        alph = self.alphabet
        sign = 1
        for i in range(self.legs):
            if alph.mono_parity(k2[i]):
                cross = sum(alph.mono_parity(k1[j])
                            for j in range(i + 1, self.legs))
                if cross % 2:
                    sign = -sign
        out = []
        for a, b in zip(k1, k2):
            hit = mono_mul(alph, a, b)
            if hit is None:
                return None
            s, m = hit
            sign *= s
            out.append(m)
        return sign, tuple(out)

    def mul(self, other):
        self._check(other)
        ring, cap = self.ring, self.cap
        terms: dict = {}
        for k1, c1 in self.terms.items():
            d1 = self.term_degree(k1)
            for k2, c2 in other.terms.items():
                if d1 + self.term_degree(k2) > cap:
                    continue
                hit = self._term_mul(k1, k2)
                if hit is None:
                    continue
                sign, key = hit
                c = ring.mul(c1, c2)
                if sign < 0:
                    c = ring.neg(c)
                s = ring.add(terms.get(key, ring.zero), c)
                if ring.is_zero(s):
                    terms.pop(key, None)
                else:
                    terms[key] = s
        return TensorPoly(ring, self.alphabet, cap, self.legs, terms,
                          _clean=True)

    def pow(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = TensorPoly.unit(self.ring, self.alphabet, self.cap, self.legs)
        base = self
        while e:
            if e & 1:
                out = out.mul(base)
            base = base.mul(base) if e > 1 else base
            e >>= 1
        return out

    def mul_leg_left(self, i, poly):
        """Multiply leg i on the left by a one-leg polynomial.

        Crossing legs 0..i-1 picks up the Koszul sign of the factor.
        """
        ring, alph = self.ring, self.alphabet
        terms: dict = {}
        for mono, cp in poly.terms.items():
            par = alph.mono_parity(mono)
            for key, c in self.terms.items():
                if self.term_degree(key) + alph.mono_degree(mono) > self.cap:
                    continue
                hit = mono_mul(alph, mono, key[i])
                if hit is None:
                    continue
                sign, m = hit
                if par and sum(alph.mono_parity(key[j])
                               for j in range(i)) % 2:
                    sign = -sign
                prod = ring.mul(cp, c)
                if sign < 0:
                    prod = ring.neg(prod)
                new = key[:i] + (m,) + key[i + 1:]
                s = ring.add(terms.get(new, ring.zero), prod)
                if ring.is_zero(s):
                    terms.pop(new, None)
                else:
                    terms[new] = s
        return TensorPoly(ring, alph, self.cap, self.legs, terms, _clean=True)

    def apply_on_leg(self, i, fn, out_legs):
        """Replace leg i by fn(mono), a tensor with out_legs legs."""
        ring = self.ring
        terms: dict = {}
        for key, c in self.terms.items():
            img = fn(key[i])
            for sub, c2 in img.terms.items():
                new = key[:i] + sub + key[i + 1:]
                prod = ring.mul(c, c2)
                s = ring.add(terms.get(new, ring.zero), prod)
                if ring.is_zero(s):
                    terms.pop(new, None)
                else:
                    terms[new] = s
        out = TensorPoly(ring, self.alphabet, self.cap,
                         self.legs - 1 + out_legs, terms, _clean=True)
        out._drop_overflow()
        return out

    def change_ring(self, ring):
        terms = {}
        for k, c in self.terms.items():
            x = ring.coerce(c)
            if not ring.is_zero(x):
                terms[k] = x
        return TensorPoly(ring, self.alphabet, self.cap, self.legs, terms,
                          _clean=True)

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda kc: self.term_sort_key(kc[0]))

    def __eq__(self, other):
        return (isinstance(other, TensorPoly) and self.ring == other.ring
                and self.alphabet == other.alphabet and self.cap == other.cap
                and self.legs == other.legs and self.terms == other.terms)

    def __repr__(self):
        return "TensorPoly(%s)" % render_tensor(self)


def render_tensor(tp: TensorPoly) -> str:
    """Canonical text: legs joined by '|', terms by signed ' + '."""
    if tp.is_zero():
        return "0"
    ring, alph = tp.ring, tp.alphabet
    pieces = []
    for key, c in tp.sorted_terms():
        body_mono = "|".join(alph.render_mono(leg) for leg in key)
        neg = False
        if not ring.is_field or ring.p is None:
            neg = c < 0
            if neg:
                c = -c
        txt = render_coeff(c)
        if txt == "1":
            body = body_mono
        else:
            body = "%s*%s" % (txt, body_mono)
        pieces.append(("-" if neg else "+", body))
    sign0, body0 = pieces[0]
    out = ("-" + body0) if sign0 == "-" else body0
    for sign, body in pieces[1:]:
        out += " %s %s" % (sign, body)
    return out


def parse_tensor(ring, alphabet, text, cap, legs) -> TensorPoly:
    """Inverse of render_tensor."""
    s = text.replace(" ", "")
    if s == "0":
        return TensorPoly.zero(ring, alphabet, cap, legs)
    total = TensorPoly.zero(ring, alphabet, cap, legs)
    for sgn, term in split_signed_terms(s):
        leg_txts = term.split("|")
        if len(leg_txts) != legs:
            raise ParseError("term %r has %d legs, expected %d"
                             % (term, len(leg_txts), legs))
        coeff = ring.one
        key = []
        dead = False
        for ltxt in leg_txts:
            hit = parse_term(ring, alphabet, ltxt)
            if hit is None:
                dead = True
                break
            c, mono = hit
            coeff = ring.mul(coeff, c)
            key.append(mono)
        if dead:
            continue
        if sgn < 0:
            coeff = ring.neg(coeff)
        total = total.add(TensorPoly(ring, alphabet, cap, legs,
                                     {tuple(key): coeff}))
    return total


class AxiomReport:
    """Outcome of structure-map verification; never raises."""

    def __init__(self):
        self.violations = []

    @property
    def ok(self):
        return not self.violations

    def record(self, axiom, generator, degree, message):
        self.violations.append({
            "axiom": axiom, "generator": generator,
            "degree": degree, "message": message,
        })

    def __str__(self):
        if self.ok:
            return "all axioms hold"
        lines = ["%d violation(s):" % len(self.violations)]
        for v in self.violations:
            lines.append("  %(axiom)s at %(generator)s "
                         "(degree %(degree)s): %(message)s" % v)
        return "\n".join(lines)

    def __repr__(self):
        return "AxiomReport(ok=%s, violations=%d)" % (self.ok,
                                                      len(self.violations))


class HopfAlgebroid:
    """Pair (A, Gamma) with structure maps tabulated on generators.

    The alphabet lists base generators (acting through the left unit)
    first, then the Gamma-only generators.  Comultiplication tables keep
    their right leg free of base generators; push_left restores that
    canonical form after leg surgery.
    """

    def __init__(self, ring, alphabet, cap, a_names, g_names,
                 eta_R_table, diag_table, kind, prime):
        self.ring = ring
        self.alphabet = alphabet
        self.cap = int(cap)
        self.a_names = tuple(a_names)
        self.g_names = tuple(g_names)
        self.kind = kind
        self.prime = int(prime)
        if tuple(alphabet.names) != self.a_names + self.g_names:
            raise ValueError("alphabet must list base generators first")
        self.n_a = len(self.a_names)
        self.eta_R_table = dict(eta_R_table)
        self.diag_table = dict(diag_table)
        for name, tp in self.diag_table.items():
            for key in tp.terms:
                if self._apart(key[1]):
                    raise AxiomViolation(
                        "diag(%s) right leg contains base generators" % name)
        self._eta_R_memo = {(): Poly.one(ring, alphabet, cap)}
        self._diag_memo = {(): TensorPoly.unit(ring, alphabet, cap, 2)}
        self._rdiag_memo = {}
        self._conj_gen_memo = {}
        self._conj_in_progress = set()
        self._conj_memo = {(): Poly.one(ring, alphabet, cap)}

    # -- monomial bookkeeping --------------------------------------------------

    def _apart(self, mono):
        return tuple((i, e) for i, e in mono if i < self.n_a)

    def _gpart(self, mono):
        return tuple((i, e) for i, e in mono if i >= self.n_a)

    def split_mono(self, mono):
        """(base part, Gamma-only part) of a monomial."""
        return self._apart(mono), self._gpart(mono)

    def is_base_mono(self, mono):
        return not self._gpart(mono)

    def poly(self, text):
        from .poly import parse_poly
        return parse_poly(self.ring, self.alphabet, text, self.cap)

    def gen_poly(self, name, exp=1):
        return Poly.gen(self.ring, self.alphabet, name, self.cap, exp)

    # -- counit ------------------------------------------------------------------

    def eps(self, poly):
        """Counit: kill every term containing a Gamma-only generator."""
        terms = {m: c for m, c in poly.terms.items() if not self._gpart(m)}
        return Poly(poly.ring, poly.alphabet, terms, poly.cap, _clean=True)

    # -- right unit ----------------------------------------------------------------

    def eta_R_mono(self, a_mono):
        """Right unit on a base monomial, extended multiplicatively."""
        memo = self._eta_R_memo
        if a_mono in memo:
            return memo[a_mono]
        i, e = a_mono[-1]
        if e > 1:
            smaller = a_mono[:-1] + ((i, e - 1),)
        else:
            smaller = a_mono[:-1]
        name = self.alphabet.names[i]
        out = self.eta_R_mono(smaller).mul(self.eta_R_table[name])
        memo[a_mono] = out
        return out

    def eta_R(self, poly):
        """Right unit on a polynomial in the base generators."""
        out = Poly.zero(self.ring, self.alphabet, self.cap)
        for mono, c in poly.terms.items():
            if self._gpart(mono):
                raise ValueError("eta_R applies to base elements only")
            out = out.add(self.eta_R_mono(mono).scale(c))
        return out

    # -- comultiplication -------------------------------------------------------------

    def diag_mono(self, g_mono):
        """Comultiplication of a Gamma-only monomial (memoised)."""
        memo = self._diag_memo
        if g_mono in memo:
            return memo[g_mono]
        i, e = g_mono[-1]
        if e > 1:
            smaller = g_mono[:-1] + ((i, e - 1),)
        else:
            smaller = g_mono[:-1]
        name = self.alphabet.names[i]
        out = self.diag_mono(smaller).mul(self.diag_table[name])
        memo[g_mono] = out
        return out

    def diag_of_mono(self, mono):
        """Comultiplication of a mixed monomial, in canonical form."""
        V, T = self.split_mono(mono)
        out = self.diag_mono(T)
        if V:
            out = out.mul_leg_left(0, Poly.monomial(
                self.ring, self.alphabet, V, self.cap))
        return out

    def diag(self, poly):
        """Comultiplication of any element, in canonical form."""
        out = TensorPoly.zero(self.ring, self.alphabet, self.cap, 2)
        for mono, c in poly.terms.items():
            out = out.add(self.diag_of_mono(mono).scale(c))
        return out

    def reduced_diag_mono(self, mono):
        """Two-leg expansion with both legs counit-free (memoised).

        Defined on monomials with nonempty Gamma part; drops the
        primitive terms of the comultiplication and the right-unit
        correction of the base part.
        """
        memo = self._rdiag_memo
        if mono in memo:
            return memo[mono]
        ring, alph, cap = self.ring, self.alphabet, self.cap
        V, T = self.split_mono(mono)
        if not T:
            raise ValueError("reduced diagonal needs a Gamma-only part")
        terms: dict = {}
        for (L, R), c in self.diag_mono(T).terms.items():
            if not R:
                continue
            hit = mono_mul(alph, V, L)
            if hit is None:
                continue
            sign, VL = hit
            if not self._gpart(VL):
                continue
            cc = ring.mul(c, ring.coerce(sign))
            key = (VL, R)
            s = ring.add(terms.get(key, ring.zero), cc)
            if ring.is_zero(s):
                terms.pop(key, None)
            else:
                terms[key] = s
        out = TensorPoly(ring, alph, cap, 2, terms, _clean=True)
        if V:
            tail = self.eta_R_mono(V).sub(
                Poly.monomial(ring, alph, V, cap))
            corr = TensorPoly.of_polys(
                [tail, Poly.monomial(ring, alph, T, cap)])
            out = out.sub(corr)
        for (L, R) in out.terms:
            if not self._gpart(L) or not self._gpart(R):
                raise AxiomViolation(
                    "reduced diagonal term %s|%s has a counit-visible leg"
                    % (alph.render_mono(L), alph.render_mono(R)))
        memo[mono] = out
        return out

    # -- canonical form -------------------------------------------------------------------

    def push_left(self, tp: TensorPoly) -> TensorPoly:
        """Move base-generator action to leg 0 across the tensor product."""
        ring, alph = self.ring, self.alphabet
        work = [(key, c) for key, c in tp.terms.items()]
        for i in range(tp.legs - 1, 0, -1):
            nxt = []
            for key, c in work:
                V, T = self.split_mono(key[i])
                if not V:
                    nxt.append((key, c))
                    continue
                er = self.eta_R_mono(V)
                for mono, ce in er.terms.items():
                    hit = mono_mul(alph, key[i - 1], mono)
                    if hit is None:
                        continue
                    sign, m = hit
                    cc = ring.mul(c, ce)
                    if sign < 0:
                        cc = ring.neg(cc)
                    nxt.append((key[:i - 1] + (m, T) + key[i + 1:], cc))
            work = nxt
        terms: dict = {}
        for key, c in work:
            s = ring.add(terms.get(key, ring.zero), c)
            if ring.is_zero(s):
                terms.pop(key, None)
            else:
                terms[key] = s
        return TensorPoly(ring, alph, tp.cap, tp.legs, terms, _clean=True)

    # -- conjugation --------------------------------------------------------------------------

    def conj_gen(self, name):
        """Antipode on one Gamma generator, solved from the fold law."""
        memo = self._conj_gen_memo
        if name in memo:
            return memo[name]
        if name in self._conj_in_progress:
            raise AxiomViolation(
                "conjugation recursion through %s is not well-founded"
                % name)
        self._conj_in_progress.add(name)
        try:
            ring, alph, cap = self.ring, self.alphabet, self.cap
            gi = alph.index(name)
            g_mono = ((gi, 1),)
            acc = Poly.zero(ring, alph, cap)
            seen_lead = False
            for (L, R), c in self.diag_table[name].terms.items():
                if L == g_mono and not R:
                    if c != ring.one:
                        raise AxiomViolation(
                            "diag(%s) primitive term has coefficient %s"
                            % (name, c))
                    seen_lead = True
                    continue
                term = self.conj(Poly.monomial(ring, alph, L, cap, c)).mul(
                    Poly.monomial(ring, alph, R, cap))
                acc = acc.add(term)
            if not seen_lead:
                raise AxiomViolation("diag(%s) lacks the %s|1 term"
                                     % (name, name))
            out = acc.neg()
            memo[name] = out
            return out
        finally:
            self._conj_in_progress.discard(name)

    def conj_mono(self, mono):
        memo = self._conj_memo
        if mono in memo:
            return memo[mono]
        ring, alph, cap = self.ring, self.alphabet, self.cap
        i, e = mono[-1]
        if e > 1:
            smaller = mono[:-1] + ((i, e - 1),)
        else:
            smaller = mono[:-1]
        name = alph.names[i]
        if i < self.n_a:
            last = self.eta_R_table[name]
        else:
            last = self.conj_gen(name)
        out = self.conj_mono(smaller).mul(last)
        memo[mono] = out
        return out

    def conj(self, poly):
        """Antipode as a ring map (base generators go to the right unit)."""
        out = Poly.zero(self.ring, self.alphabet, self.cap)
        for mono, c in poly.terms.items():
            out = out.add(self.conj_mono(mono).scale(c))
        return out

    def __repr__(self):
        return ("HopfAlgebroid(kind=%r, p=%d, cap=%d, base=%s, gamma=%s)"
                % (self.kind, self.prime, self.cap,
                   list(self.a_names), list(self.g_names)))


# -- construction: Brown-Peterson ------------------------------------------------

def _bp_generator_count(p, cap):
    m = 0
    while 2 * (p ** (m + 1) - 1) <= cap:
        m += 1
    return m


def build_bp(p, cap):
    """Cooperations pair for the p-typical theory, truncated at cap."""
    if p < 2:
        raise ValueError("p must be a prime")
    m = _bp_generator_count(p, cap)
    if m < 1:
        raise CapTooSmall("cap %d admits no generators at p=%d (need >= %d)"
                          % (cap, p, 2 * (p - 1)))
    vnames = tuple("v%d" % i for i in range(1, m + 1))
    tnames = tuple("t%d" % i for i in range(1, m + 1))
    degs = [2 * (p ** i - 1) for i in range(1, m + 1)]
    alph = Alphabet(vnames + tnames, tuple(degs + degs),
                    parities=(0,) * (2 * m),
                    weights=tuple([1] * m + [0] * m))
    from .linalg import QQ, ZP
    q = QQ

    def vp(i):
        return Poly.gen(q, alph, "v%d" % i, cap)

    def tp(j, e=1):
        if j == 0:
            return Poly.one(q, alph, cap)
        return Poly.gen(q, alph, "t%d" % j, cap).pow(e)

    one = Poly.one(q, alph, cap)
    mlist = [one]
    for n in range(1, m + 1):
        acc = Poly.zero(q, alph, cap)
        for i in range(n):
            acc = acc.add(mlist[i].mul(vp(n - i).pow(p ** i)))
        mlist.append(acc.scale(Fraction(1, p)))

    etaRm = [one]
    for n in range(1, m + 1):
        acc = Poly.zero(q, alph, cap)
        for i in range(n + 1):
            acc = acc.add(mlist[i].mul(tp(n - i, p ** i)))
        etaRm.append(acc)

    etaRv = {}
    for n in range(1, m + 1):
        acc = etaRm[n].scale(p)
        for i in range(1, n):
            acc = acc.sub(etaRm[i].mul(etaRv[n - i].pow(p ** i)))
        etaRv[n] = acc

    diagT = {0: TensorPoly.unit(q, alph, cap, 2)}
    for n in range(1, m + 1):
        acc = TensorPoly.zero(q, alph, cap, 2)
        for i in range(n + 1):
            for j in range(n - i + 1):
                k = n - i - j
                part = TensorPoly.of_polys([tp(j, p ** i),
                                            tp(k, p ** (i + j))])
                if i:
                    part = part.mul_leg_left(0, mlist[i])
                acc = acc.add(part)
        for i in range(1, n + 1):
            acc = acc.sub(diagT[n - i].pow(p ** i).mul_leg_left(0, mlist[i]))
        diagT[n] = acc

    ring = ZP(p)

    def integral_poly(poly):
        try:
            return poly.change_ring(ring)
        except ValueError as exc:
            raise AxiomViolation("p-divisible denominator: %s" % exc)

    def integral_tensor(tp_):
        try:
            return tp_.change_ring(ring)
        except ValueError as exc:
            raise AxiomViolation("p-divisible denominator: %s" % exc)

    eta_table = {"v%d" % n: integral_poly(etaRv[n]) for n in range(1, m + 1)}
    diag_table = {"t%d" % n: integral_tensor(diagT[n])
                  for n in range(1, m + 1)}
    return HopfAlgebroid(ring, alph, cap, vnames, tnames,
                         eta_table, diag_table, "bp", p)


# -- construction: dual Steenrod algebra ----------------------------------------

def build_dual_steenrod(p, cap):
    """Dual Steenrod algebra at p, truncated at cap."""
    from .linalg import FP
    ring = FP(p)
    if p == 2:
        names, degs = [], []
        n = 1
        while 2 ** n - 1 <= cap:
            names.append("xi%d" % n)
            degs.append(2 ** n - 1)
            n += 1
        if not names:
            raise CapTooSmall("cap %d below the first generator" % cap)
        alph = Alphabet(tuple(names), tuple(degs),
                        parities=(0,) * len(names),
                        weights=(0,) * len(names))

        def xi(i, e=1):
            if i == 0:
                return Poly.one(ring, alph, cap)
            return Poly.gen(ring, alph, "xi%d" % i, cap).pow(e)

        diag_table = {}
        for k in range(1, len(names) + 1):
            acc = TensorPoly.zero(ring, alph, cap, 2)
            for i in range(k + 1):
                acc = acc.add(TensorPoly.of_polys(
                    [xi(k - i, 2 ** i), xi(i)]))
            diag_table["xi%d" % k] = acc
        return HopfAlgebroid(ring, alph, cap, (), tuple(names),
                             {}, diag_table, "steenrod", p)

    names, degs, pars = [], [], []
    n = 1
    while 2 * (p ** n - 1) <= cap:
        names.append("xi%d" % n)
        degs.append(2 * (p ** n - 1))
        pars.append(0)
        n += 1
    ntau = 0
    while 2 * p ** ntau - 1 <= cap:
        names.append("tau%d" % ntau)
        degs.append(2 * p ** ntau - 1)
        pars.append(1)
        ntau += 1
    if ntau == 0:
        raise CapTooSmall("cap %d below the first generator" % cap)
    alph = Alphabet(tuple(names), tuple(degs), parities=tuple(pars),
                    weights=(0,) * len(names))
    nxi = sum(1 for nm in names if nm.startswith("xi"))

    def xi(i, e=1):
        if i == 0:
            return Poly.one(ring, alph, cap)
        return Poly.gen(ring, alph, "xi%d" % i, cap).pow(e)

    def tau(i):
        return Poly.gen(ring, alph, "tau%d" % i, cap)

    diag_table = {}
    for k in range(1, nxi + 1):
        acc = TensorPoly.zero(ring, alph, cap, 2)
        for i in range(k + 1):
            acc = acc.add(TensorPoly.of_polys([xi(k - i, p ** i), xi(i)]))
        diag_table["xi%d" % k] = acc
    one = Poly.one(ring, alph, cap)
    for k in range(ntau):
        acc = TensorPoly.of_polys([tau(k), one])
        for i in range(k + 1):
            if k - i > nxi:
                continue
            acc = acc.add(TensorPoly.of_polys([xi(k - i, p ** i), tau(i)]))
        diag_table["tau%d" % k] = acc
    return HopfAlgebroid(ring, alph, cap, (), tuple(names),
                         {}, diag_table, "steenrod", p)


# -- construction: mod-I quotient ------------------------------------------------

def build_quotient_P(h: HopfAlgebroid) -> HopfAlgebroid:
    """Quotient Hopf algebra over F_p: kill p and the base generators."""
    from .linalg import FP
    ring = FP(h.prime)
    gnames = h.g_names
    gidx = [h.alphabet.index(n) for n in gnames]
    old_to_new = {old: new for new, old in enumerate(gidx)}
    alph = Alphabet(gnames,
                    tuple(h.alphabet.degrees[i] for i in gidx),
                    parities=tuple(h.alphabet.parities[i] for i in gidx),
                    weights=(0,) * len(gnames))

    def remap(mono):
        return tuple((old_to_new[i], e) for i, e in mono)

    diag_table = {}
    for name in gnames:
        terms = {}
        for (L, R), c in h.diag_table[name].terms.items():
            if h._apart(L):
                continue
            x = ring.coerce(c)
            if ring.is_zero(x):
                continue
            terms[(remap(L), remap(R))] = x
        diag_table[name] = TensorPoly(ring, alph, h.cap, 2, terms,
                                      _clean=True)
    return HopfAlgebroid(ring, alph, h.cap, (), gnames, {}, diag_table,
                         "quotientP", h.prime)


# -- axiom verification ------------------------------------------------------------

def check_axioms(h: HopfAlgebroid) -> AxiomReport:
    """Verify grading, counit, coassociativity, compatibility, antipode.

    Returns a report; never raises on a failed axiom.
    """
    report = AxiomReport()
    ring, alph, cap = h.ring, h.alphabet, h.cap

    def guarded(axiom, name, deg, fn):
        try:
            fn()
        except Exception as exc:
            report.record(axiom, name, deg,
                          "%s: %s" % (type(exc).__name__, exc))

    for name in h.a_names:
        deg = alph.degrees[alph.index(name)]
        er = h.eta_R_table[name]

        def chk_grading(er=er, name=name, deg=deg):
            if er.degree() != deg:
                report.record("grading", name, deg,
                              "right unit is not homogeneous of degree %d"
                              % deg)

        def chk_counit(er=er, name=name, deg=deg):
            if h.eps(er) != h.gen_poly(name):
                report.record("counit-right-unit", name, deg,
                              "eps(eta_R(%s)) differs from %s"
                              % (name, name))

        def chk_diag(er=er, name=name, deg=deg):
            lhs = h.push_left(h.diag(er))
            rhs = h.push_left(TensorPoly.of_polys(
                [Poly.one(ring, alph, cap), er]))
            if lhs != rhs:
                report.record("diag-right-unit", name, deg,
                              "diag(eta_R(%s)) is not 1|eta_R(%s)"
                              % (name, name))

        def chk_conj(er=er, name=name, deg=deg):
            if h.conj(er) != h.gen_poly(name):
                report.record("antipode-right-unit", name, deg,
                              "conj(eta_R(%s)) differs from %s"
                              % (name, name))

        guarded("grading", name, deg, chk_grading)
        guarded("counit-right-unit", name, deg, chk_counit)
        guarded("diag-right-unit", name, deg, chk_diag)
        guarded("antipode-right-unit", name, deg, chk_conj)

    for name in h.g_names:
        deg = alph.degrees[alph.index(name)]
        D = h.diag_table[name]

        def chk_grading(D=D, name=name, deg=deg):
            degs = {D.term_degree(k) for k in D.terms}
            if degs != {deg}:
                report.record("grading", name, deg,
                              "comultiplication degrees %s" % sorted(degs))

        def chk_counit_left(D=D, name=name, deg=deg):
            left = Poly.zero(ring, alph, cap)
            for (L, R), c in D.terms.items():
                if not h._gpart(L):
                    hit = mono_mul(alph, L, R)
                    if hit is not None:
                        s, m = hit
                        cc = ring.mul(c, ring.coerce(s))
                        left = left.add(
                            Poly.monomial(ring, alph, m, cap, cc))
            if left != h.gen_poly(name):
                report.record("counit-left", name, deg,
                              "(eps|1)diag(%s) differs from %s"
                              % (name, name))

        def chk_counit_right(D=D, name=name, deg=deg):
            right = Poly.zero(ring, alph, cap)
            for (L, R), c in D.terms.items():
                if not R:
                    right = right.add(Poly.monomial(ring, alph, L, cap, c))
            if right != h.gen_poly(name):
                report.record("counit-right", name, deg,
                              "(1|eps)diag(%s) differs from %s"
                              % (name, name))

        def chk_coassoc(D=D, name=name, deg=deg):
            lhs = h.push_left(D.apply_on_leg(0, h.diag_of_mono, 2))
            rhs = h.push_left(D.apply_on_leg(1, h.diag_mono, 2))
            if lhs != rhs:
                report.record("coassociativity", name, deg,
                              "the two triple expansions of diag(%s) differ"
                              % name)

        def chk_fold(D=D, name=name, deg=deg):
            folded = Poly.zero(ring, alph, cap)
            for (L, R), c in D.terms.items():
                folded = folded.add(
                    h.conj(Poly.monomial(ring, alph, L, cap, c)).mul(
                        Poly.monomial(ring, alph, R, cap)))
            if not folded.is_zero():
                report.record("antipode-fold", name, deg,
                              "fold of (conj|1)diag(%s) is nonzero" % name)

        def chk_involution(name=name, deg=deg):
            if h.conj(h.conj_gen(name)) != h.gen_poly(name):
                report.record("antipode-involution", name, deg,
                              "conj(conj(%s)) differs from %s"
                              % (name, name))

        guarded("grading", name, deg, chk_grading)
        guarded("counit-left", name, deg, chk_counit_left)
        guarded("counit-right", name, deg, chk_counit_right)
        guarded("coassociativity", name, deg, chk_coassoc)
        guarded("antipode-fold", name, deg, chk_fold)
        guarded("antipode-involution", name, deg, chk_involution)

    return report


# -- augmentation ideal ------------------------------------------------------------

class AugmentationIdeal:
    """The ideal (p, base generators) of A, with graded pieces."""

    def __init__(self, h: HopfAlgebroid):
        self.hopf = h

    def power_basis(self, n, t):
        """Basis of the degree-t part of the n-th power.

        Entries are (k, mono) for p^k * mono; n <= 0 means the whole ring.
        """
        h = self.hopf
        out = []
        for mono in basis_in_degree(h.alphabet, t, subset=h.a_names):
            w = h.alphabet.mono_weight(mono)
            out.append((max(0, n - w), mono))
        return out

    def gr_basis(self, n, t):
        """Basis of the degree-t part of the n-th graded piece.

        Entries are (e0, mono): the class of p^e0 * mono with
        e0 + weight(mono) = n.
        """
        h = self.hopf
        out = []
        for mono in basis_in_degree(h.alphabet, t, subset=h.a_names):
            w = h.alphabet.mono_weight(mono)
            if w <= n:
                out.append((n - w, mono))
        return out


def ideal_power_basis(ideal, n, t):
    if isinstance(ideal, HopfAlgebroid):
        ideal = AugmentationIdeal(ideal)
    return ideal.power_basis(n, t)


def ideal_gr_basis(ideal, n, t):
    if isinstance(ideal, HopfAlgebroid):
        ideal = AugmentationIdeal(ideal)
    return ideal.gr_basis(n, t)


# -- serialization -------------------------------------------------------------------

def _ring_tag(ring):
    if ring.p is None:
        return "Q"
    return "Fp" if ring.is_field else "Zp"


def _ring_from_tag(tag, p):
    from .linalg import FP, QQ, ZP
    if tag == "Q":
        return QQ
    if tag == "Fp":
        return FP(p)
    if tag == "Zp":
        return ZP(p)
    raise ParseError("unknown scalar tag %r" % tag)


def dump_hopf(h: HopfAlgebroid) -> str:
    """Versioned text form; deterministic for equal inputs."""
    lines = ["novikov hopf v1",
             "kind: %s" % h.kind,
             "prime: %d" % h.prime,
             "cap: %d" % h.cap,
             "scalars: %s" % _ring_tag(h.ring)]
    gens = []
    for i, name in enumerate(h.alphabet.names):
        role = "a" if i < h.n_a else "g"
        gens.append("%s %d %d %d %s" % (name, h.alphabet.degrees[i],
                                        h.alphabet.weights[i],
                                        h.alphabet.parities[i], role))
    lines.append("gens: " + "; ".join(gens))
    from .poly import render_poly
    for name in h.a_names:
        lines.append("etaR %s: %s" % (name, render_poly(h.eta_R_table[name])))
    for name in h.g_names:
        lines.append("diag %s: %s" % (name, render_tensor(h.diag_table[name])))
    return "\n".join(lines) + "\n"


def load_hopf(text: str) -> HopfAlgebroid:
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "novikov hopf v1":
        raise ParseError("not a hopf dump (missing header)")
    fields = {}
    eta_lines, diag_lines = [], []
    for ln in lines[1:]:
        if ln.startswith("etaR "):
            eta_lines.append(ln)
        elif ln.startswith("diag "):
            diag_lines.append(ln)
        else:
            key, _, val = ln.partition(":")
            fields[key.strip()] = val.strip()
    try:
        kind = fields["kind"]
        prime = int(fields["prime"])
        cap = int(fields["cap"])
        tag = fields["scalars"]
        gen_field = fields["gens"]
    except KeyError as exc:
        raise ParseError("missing field %s" % exc)
    names, degs, weights, pars, roles = [], [], [], [], []
    for chunk in gen_field.split(";"):
        parts = chunk.split()
        if len(parts) != 5:
            raise ParseError("bad generator entry %r" % chunk)
        names.append(parts[0])
        degs.append(int(parts[1]))
        weights.append(int(parts[2]))
        pars.append(int(parts[3]))
        roles.append(parts[4])
    alph = Alphabet(tuple(names), tuple(degs), parities=tuple(pars),
                    weights=tuple(weights))
    ring = _ring_from_tag(tag, prime)
    a_names = tuple(n for n, r in zip(names, roles) if r == "a")
    g_names = tuple(n for n, r in zip(names, roles) if r == "g")
    from .poly import parse_poly
    eta_table = {}
    for ln in eta_lines:
        head, _, body = ln.partition(":")
        name = head.split()[1]
        eta_table[name] = parse_poly(ring, alph, body.strip(), cap)
    diag_table = {}
    for ln in diag_lines:
        head, _, body = ln.partition(":")
        name = head.split()[1]
        diag_table[name] = parse_tensor(ring, alph, body.strip(), cap, 2)
    missing = [n for n in a_names if n not in eta_table]
    missing += [n for n in g_names if n not in diag_table]
    if missing:
        raise ParseError("missing structure maps for %s" % missing)
    return HopfAlgebroid(ring, alph, cap, a_names, g_names,
                         eta_table, diag_table, kind, prime)
