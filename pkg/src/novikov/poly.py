"""Graded polynomial algebra on a finite alphabet with hard degree caps.

Monomials are tuples of (generator_index, exponent) pairs sorted by index;
the empty tuple is 1.  Generators carry an internal degree (positive), a
parity for Koszul signs (odd generators anticommute and square to zero),
and a filtration weight.  Polynomials are dicts monomial -> coefficient
over one of the scalar rings from ``linalg``.

Every polynomial carries an internal-degree cap: products silently discard
terms above the cap (that is the semantics of a truncated presentation),
but combining polynomials with different caps raises CapMismatch so that
truncation levels never mix by accident.

Degree bases are enumerated in graded-lexicographic order, descending in
the exponent vector: in degree 6 with |v1| = 2 and |v2| = 6 the basis
reads [v1^3, v2].  Every ordering here is deterministic.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import (AlphabetMismatch, CapMismatch, CapTooSmall,
                     DegreeMismatch, ParseError, RingMismatch)

MAX_TERMS = 500000

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?$")


class Alphabet:
    """Ordered generator list with degrees, parities and weights."""

    __slots__ = ("names", "degrees", "parities", "weights", "_index", "_key")

    def __init__(self, names, degrees, parities=None, weights=None):
        names = tuple(names)
        degrees = tuple(degrees)
        if len(names) != len(degrees):
            raise ValueError("names and degrees differ in length")
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for n in names:
            if not _NAME_RE.match(n):
                raise ValueError("bad generator name %r" % (n,))
        for d in degrees:
            if d <= 0:
                raise ValueError("generator degrees must be positive")
        if parities is None:
            parities = tuple(0 for _ in names)
        else:
            parities = tuple(int(x) % 2 for x in parities)
        if weights is None:
            weights = tuple(0 for _ in names)
        else:
            weights = tuple(int(x) for x in weights)
        if len(parities) != len(names) or len(weights) != len(names):
            raise ValueError("parities/weights differ in length")
        self.names = names
        self.degrees = degrees
        self.parities = parities
        self.weights = weights
        self._index = {n: i for i, n in enumerate(names)}
        self._key = (names, degrees, parities, weights)

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError("unknown generator %r" % (name,))

    def has(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and other._key == self._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return "Alphabet(%s)" % ", ".join(
            "%s:%d" % (n, d) for n, d in zip(self.names, self.degrees))

    # -- monomial helpers ---------------------------------------------------

    def mono_degree(self, mono) -> int:
        return sum(e * self.degrees[i] for i, e in mono)

    def mono_weight(self, mono) -> int:
        return sum(e * self.weights[i] for i, e in mono)

    def mono_parity(self, mono) -> int:
        return sum(e * self.parities[i] for i, e in mono) % 2

    def mono_valid(self, mono) -> bool:
        """Sorted, positive exponents, odd generators at most once."""
        last = -1
        for i, e in mono:
            if i <= last or e <= 0:
                return False
            if self.parities[i] and e > 1:
                return False
            last = i
        return True

    def exp_vector(self, mono):
        v = [0] * len(self.names)
        for i, e in mono:
            v[i] = e
        return tuple(v)

    def mono_from_exp(self, vec):
        return tuple((i, e) for i, e in enumerate(vec) if e)

    def mono_sort_key(self, mono):
        """(degree, descending-lex exponent vector)."""
        return (self.mono_degree(mono),
                tuple(-e for e in self.exp_vector(mono)))

    def render_mono(self, mono) -> str:
        if not mono:
            return "1"
        parts = []
        for i, e in mono:
            parts.append(self.names[i] if e == 1 else
                         "%s^%d" % (self.names[i], e))
        return "*".join(parts)


def mono_mul(alphabet: Alphabet, m1, m2):
    """(sign, product monomial) or None when an odd generator repeats."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    par = alphabet.parities
    odd1 = [i for i, e in m1 if par[i]]
    odd2 = [i for i, e in m2 if par[i]]
    sign = 1
    if odd1 and odd2:
        inv = 0
        for g2 in odd2:
            for g1 in odd1:
                if g1 > g2:
                    inv += 1
                elif g1 == g2:
                    return None
        if inv % 2:
            sign = -1
    merged = dict(m1)
    for i, e in m2:
        merged[i] = merged.get(i, 0) + e
    return sign, tuple(sorted(merged.items()))


def basis_in_degree(alphabet: Alphabet, t: int, subset=None):
    """Monomials of exact degree t in the given generators, graded-lex.

    ``subset`` is an iterable of generator names; None means all of them.
    Ordering is by descending exponent vector (generator index ascending).
    """
    if t < 0:
        return []
    if subset is None:
        indices = list(range(len(alphabet)))
    else:
        indices = sorted(alphabet.index(n) for n in subset)
    out = []
    vec = [0] * len(alphabet)

    def rec(k, remaining):
        if remaining == 0:
            out.append(alphabet.mono_from_exp(vec))
            return
        if k >= len(indices):
            return
        i = indices[k]
        d = alphabet.degrees[i]
        emax = remaining // d
        if alphabet.parities[i]:
            emax = min(emax, 1)
        for e in range(emax, -1, -1):
            vec[i] = e
            rec(k + 1, remaining - e * d)
        vec[i] = 0

    rec(0, t)
    return out


class Poly:
    """Truncated polynomial over one alphabet, one ring, one degree cap."""

    __slots__ = ("ring", "alphabet", "cap", "terms")

    def __init__(self, ring, alphabet, terms, cap, _clean=False):
        self.ring = ring
        self.alphabet = alphabet
        self.cap = int(cap)
        if not _clean:
            clean = {}
            for mono, c in terms.items():
                mono = tuple(tuple(p) for p in mono)
                if not alphabet.mono_valid(mono):
                    raise ValueError("invalid monomial %r" % (mono,))
                if alphabet.mono_degree(mono) > self.cap:
                    raise CapTooSmall(
                        "term %s exceeds cap %d"
                        % (alphabet.render_mono(mono), self.cap))
                c = ring.coerce(c)
                if not ring.is_zero(c):
                    clean[mono] = c
            terms = clean
        if len(terms) > MAX_TERMS:
            raise CapTooSmall("polynomial exceeds %d terms" % MAX_TERMS)
        self.terms = terms

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, ring, alphabet, cap):
        return cls(ring, alphabet, {}, cap, _clean=True)

    @classmethod
    def one(cls, ring, alphabet, cap):
        return cls(ring, alphabet, {(): ring.one}, cap, _clean=True)

    @classmethod
    def scalar(cls, ring, alphabet, c, cap):
        c = ring.coerce(c)
        if ring.is_zero(c):
            return cls.zero(ring, alphabet, cap)
        return cls(ring, alphabet, {(): c}, cap, _clean=True)

    @classmethod
    def gen(cls, ring, alphabet, name, cap, exp=1):
        i = alphabet.index(name)
        if exp == 0:
            return cls.one(ring, alphabet, cap)
        if alphabet.parities[i] and exp > 1:
            return cls.zero(ring, alphabet, cap)
        return cls(ring, alphabet, {((i, exp),): ring.one}, cap)

    @classmethod
    def monomial(cls, ring, alphabet, mono, cap, c=1):
        return cls(ring, alphabet, {tuple(mono): c}, cap)

    # -- predicates and access ----------------------------------------------

    def is_zero(self):
        return not self.terms

    def coeff(self, mono):
        return self.terms.get(tuple(mono), self.ring.zero)

    def degree(self):
        """Common degree of all terms; raises on inhomogeneous input."""
        degs = {self.alphabet.mono_degree(m) for m in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise DegreeMismatch("inhomogeneous polynomial, degrees %s"
                                 % sorted(degs))
        return degs.pop()

    def is_homogeneous(self):
        return len({self.alphabet.mono_degree(m) for m in self.terms}) <= 1

    def homogeneous_part(self, t):
        return Poly(self.ring, self.alphabet,
                    {m: c for m, c in self.terms.items()
                     if self.alphabet.mono_degree(m) == t},
                    self.cap, _clean=True)

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda mc: self.alphabet.mono_sort_key(mc[0]))

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatch("polynomials over different rings")
        if self.alphabet != other.alphabet:
            raise AlphabetMismatch("polynomials over different alphabets")
        if self.cap != other.cap:
            raise CapMismatch("caps %d and %d differ" % (self.cap, other.cap))

    def add(self, other):
        self._check(other)
        ring = self.ring
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = ring.add(terms.get(m, ring.zero), c)
            if ring.is_zero(s):
                terms.pop(m, None)
            else:
                terms[m] = s
        return Poly(ring, self.alphabet, terms, self.cap, _clean=True)

    def neg(self):
        ring = self.ring
        return Poly(ring, self.alphabet,
                    {m: ring.neg(c) for m, c in self.terms.items()},
                    self.cap, _clean=True)

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        ring = self.ring
        c = ring.coerce(c)
        if ring.is_zero(c):
            return Poly.zero(ring, self.alphabet, self.cap)
        return Poly(ring, self.alphabet,
                    {m: ring.mul(c, x) for m, x in self.terms.items()},
                    self.cap, _clean=True)

    def mul(self, other):
        """Product, discarding terms of degree above the cap."""
        self._check(other)
        ring, alph, cap = self.ring, self.alphabet, self.cap
        terms: dict = {}
        for m1, c1 in self.terms.items():
            d1 = alph.mono_degree(m1)
            for m2, c2 in other.terms.items():
                if d1 + alph.mono_degree(m2) > cap:
                    continue
                hit = mono_mul(alph, m1, m2)
                if hit is None:
                    continue
                sign, mono = hit
                c = ring.mul(c1, c2)
                if sign < 0:
                    c = ring.neg(c)
                s = ring.add(terms.get(mono, ring.zero), c)
                if ring.is_zero(s):
                    terms.pop(mono, None)
                else:
                    terms[mono] = s
        if len(terms) > MAX_TERMS:
            raise CapTooSmall("product exceeds %d terms" % MAX_TERMS)
        return Poly(ring, alph, terms, cap, _clean=True)

    def pow(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        out = Poly.one(self.ring, self.alphabet, self.cap)
        base = self
        while e:
            if e & 1:
                out = out.mul(base)
            base = base.mul(base) if e > 1 else base
            e >>= 1
        return out

    def substitute(self, images: dict, ring=None, alphabet=None, cap=None):
        """Replace generators by polynomials (a ring-map application).

        ``images`` maps generator names to Poly over the target algebra;
        every image must be homogeneous of the source generator's degree.
        Every generator occurring in self must be mapped.  The result is
        truncated at the target cap.
        """
        src = self.alphabet
        some = next(iter(images.values()), None)
        if ring is None:
            ring = some.ring if some is not None else self.ring
        if alphabet is None:
            alphabet = some.alphabet if some is not None else self.alphabet
        if cap is None:
            cap = some.cap if some is not None else self.cap
        for name, img in images.items():
            d = img.degree()
            if d is not None and d != src.degrees[src.index(name)]:
                raise DegreeMismatch(
                    "image of %s has degree %s, expected %d"
                    % (name, d, src.degrees[src.index(name)]))
        out = Poly.zero(ring, alphabet, cap)
        for mono, c in self.sorted_terms():
            part = Poly.scalar(ring, alphabet, c, cap)
            for i, e in mono:
                name = src.names[i]
                if name not in images:
                    raise KeyError("no image for generator %r" % name)
                part = part.mul(images[name].pow(e))
                if part.is_zero():
                    break
            out = out.add(part)
        return out

    def change_ring(self, ring):
        terms = {}
        for m, c in self.terms.items():
            x = ring.coerce(c)
            if not ring.is_zero(x):
                terms[m] = x
        return Poly(ring, self.alphabet, terms, self.cap, _clean=True)

    def with_cap(self, cap):
        """Same polynomial under a different cap; terms must all fit."""
        return Poly(self.ring, self.alphabet, dict(self.terms), cap)

    # -- misc -----------------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.ring == other.ring
                and self.alphabet == other.alphabet
                and self.cap == other.cap and self.terms == other.terms)

    def __hash__(self):
        return hash((self.ring, self.alphabet, self.cap,
                     tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return "Poly(%s; cap=%d)" % (render_poly(self), self.cap)


def render_coeff(c) -> str:
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return str(c.numerator)
        return "%d/%d" % (c.numerator, c.denominator)
    return str(c)


def render_poly(poly: Poly) -> str:
    """Canonical text form, parseable by parse_poly."""
    if poly.is_zero():
        return "0"
    ring, alph = poly.ring, poly.alphabet
    pieces = []
    for mono, c in poly.sorted_terms():
        mono_txt = alph.render_mono(mono)
        neg = False
        if not ring.is_field or ring.p is None:
            neg = c < 0
            if neg:
                c = -c
        txt = render_coeff(c)
        if mono:
            body = mono_txt if txt == "1" else "%s*%s" % (txt, mono_txt)
        else:
            body = txt
        pieces.append(("-" if neg else "+", body))
    sign0, body0 = pieces[0]
    out = ("-" + body0) if sign0 == "-" else body0
    for sign, body in pieces[1:]:
        out += " %s %s" % (sign, body)
    return out


def split_signed_terms(text: str):
    """Split an expression into [(sign, body), ...] at top-level +/-."""
    s = text.replace(" ", "")
    if not s:
        raise ParseError("empty expression")
    terms = []
    cur = ""
    i = 0
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        i = 1
    start_sign = sign
    while i < len(s):
        ch = s[i]
        if ch in "+-":
            if not cur:
                raise ParseError("dangling sign in %r" % text)
            terms.append((start_sign, cur))
            cur = ""
            start_sign = -1 if ch == "-" else 1
        else:
            cur += ch
        i += 1
    if not cur:
        raise ParseError("dangling sign in %r" % text)
    terms.append((start_sign, cur))
    return terms


def parse_term(ring, alphabet: Alphabet, term: str):
    """Parse one '*'-joined product into (coeff, mono).

    Returns None when an odd generator repeats (the term is zero).
    """
    coeff = ring.one
    mono: dict = {}
    dead = False
    for factor in term.split("*"):
        if not factor:
            raise ParseError("empty factor in %r" % term)
        if re.match(r"^\d+$", factor):
            coeff = ring.mul(coeff, ring.coerce(int(factor)))
            continue
        frac = re.match(r"^(\d+)/(\d+)$", factor)
        if frac:
            coeff = ring.mul(coeff, ring.coerce(
                Fraction(int(frac.group(1)), int(frac.group(2)))))
            continue
        m = _FACTOR_RE.match(factor)
        if not m:
            raise ParseError("bad factor %r in %r" % (factor, term))
        name, exp = m.group(1), int(m.group(2) or 1)
        try:
            gi = alphabet.index(name)
        except KeyError:
            raise ParseError("unknown generator %r in %r" % (name, term))
        mono[gi] = mono.get(gi, 0) + exp
        if alphabet.parities[gi] and mono[gi] > 1:
            dead = True
    if dead:
        return None
    return coeff, tuple(sorted(mono.items()))


def parse_poly(ring, alphabet: Alphabet, text: str, cap: int) -> Poly:
    """Parse expressions like ``v1^2 + 4*v1*t1 - 3/5``."""
    s = text.replace(" ", "")
    if s == "0":
        return Poly.zero(ring, alphabet, cap)
    total = Poly.zero(ring, alphabet, cap)
    for sgn, term in split_signed_terms(s):
        hit = parse_term(ring, alphabet, term)
        if hit is None:
            continue
        coeff, mono_t = hit
        if sgn < 0:
            coeff = ring.neg(coeff)
        if alphabet.mono_degree(mono_t) > cap:
            raise ParseError("term %r exceeds cap %d" % (term, cap))
        total = total.add(Poly(ring, alphabet, {mono_t: coeff}, cap))
    return total
