"""Comodule presentations over a Hopf algebroid, plus preset families.

A comodule is presented by generators (with internal degree and a motivic
bidegree shift kept as metadata), homogeneous relations over the base
ring, and a coaction given on generators.  All homological algebra
downstream uses the internal degree; shifts only relabel charts.

Preset families cover the quotient towers of the base ring and the
Chow-degree layer comodules over the real numbers and odd finite fields.
"""

from .errors import (AxiomViolation, CapTooSmall, ComoduleSyntaxError,
                     DegreeMismatch, NotOddPrimePower, OutOfTabulatedRange)
from .hopf import AxiomReport, HopfAlgebroid, TensorPoly
from .poly import Poly, basis_in_degree, mono_mul, parse_term, render_coeff

__all__ = [
    "Generator", "Comodule", "bp_mod_In", "cyclic_quotient",
    "free_comodule", "real_layer", "finite_field_layer", "complex_layer",
    "parse_comodule", "render_comodule", "check_comodule",
    "module_bidegree_table",
]


class Generator:
    """Module generator: name, internal degree, motivic shift metadata."""

    __slots__ = ("name", "degree", "shift")

    def __init__(self, name, degree, shift=(0, 0)):
        self.name = name
        self.degree = int(degree)
        self.shift = (int(shift[0]), int(shift[1]))
        if self.degree % 2:
            raise DegreeMismatch(
                "generator %s has odd internal degree %d" % (name, degree))
        if self.degree < 0:
            raise DegreeMismatch(
                "generator %s has negative internal degree" % name)

    def __eq__(self, other):
        return (isinstance(other, Generator) and self.name == other.name
                and self.degree == other.degree and self.shift == other.shift)

    def __repr__(self):
        return "Generator(%r, %d, %r)" % (self.name, self.degree, self.shift)


class Comodule:
    """Left comodule presented by generators, relations, and a coaction.

    relations: list of dicts {(base monomial, generator index): coeff},
    each homogeneous in internal degree.
    coaction: dict {generator index: {(Gamma monomial, generator index):
    coeff}}, the full coaction including the counit term 1|g; every
    other term must have a Gamma-positive monomial.
    """

    def __init__(self, hopf: HopfAlgebroid, name, generators, relations,
                 coaction):
        self.hopf = hopf
        self.name = name
        self.generators = list(generators)
        self.relations = [dict(r) for r in relations]
        self.coaction = {gi: dict(v) for gi, v in coaction.items()}
        self.cap = hopf.cap
        self._names = {}
        for i, g in enumerate(self.generators):
            if g.name in self._names:
                raise ComoduleSyntaxError("duplicate generator %s" % g.name)
            if hopf.alphabet.has(g.name):
                raise ComoduleSyntaxError(
                    "generator %s shadows an algebra generator" % g.name)
            self._names[g.name] = i
        self._validate()

    # -- validation ------------------------------------------------------------

    def _validate(self):
        h = self.hopf
        alph = h.alphabet
        for r in self.relations:
            if not r:
                raise ComoduleSyntaxError("empty relation")
            degs = set()
            for (mono, gi), c in r.items():
                if h._gpart(mono):
                    raise ComoduleSyntaxError(
                        "relation uses a Gamma-only generator")
                degs.add(alph.mono_degree(mono) + self.generators[gi].degree)
            if len(degs) != 1:
                raise DegreeMismatch(
                    "relation is not homogeneous: degrees %s" % sorted(degs))
        for gi, g in enumerate(self.generators):
            if gi not in self.coaction:
                raise AxiomViolation("generator %s lacks a coaction" % g.name)
            psi = self.coaction[gi]
            unit = psi.get(((), gi))
            if unit != h.ring.one:
                raise AxiomViolation(
                    "coaction of %s lacks the unit term 1|%s"
                    % (g.name, g.name))
            for (mono, gj), c in psi.items():
                if (mono, gj) == ((), gi):
                    continue
                if not h._gpart(mono):
                    raise AxiomViolation(
                        "coaction term of %s has no Gamma part" % g.name)
                d = alph.mono_degree(mono) + self.generators[gj].degree
                if d != g.degree:
                    raise DegreeMismatch(
                        "coaction of %s is not degree-preserving" % g.name)

    # -- access ------------------------------------------------------------------

    def gen_index(self, name):
        if name not in self._names:
            raise KeyError("unknown generator %r" % name)
        return self._names[name]

    def reduced_coaction(self, gi):
        """Coaction minus the unit term; every term is Gamma-positive."""
        psi = dict(self.coaction[gi])
        psi.pop(((), gi), None)
        return psi

    def module_monomials(self, t):
        """Free-module monomials (base mono, generator index) in degree t.

        Deterministic order: generators as listed, then graded-lex base
        monomials.
        """
        out = []
        h = self.hopf
        for gi, g in enumerate(self.generators):
            rem = t - g.degree
            if rem < 0:
                continue
            for mono in basis_in_degree(h.alphabet, rem, subset=h.a_names):
                out.append((mono, gi))
        return out

    def relation_columns(self, t, index):
        """Relation-span columns in degree t over the given basis index.

        index maps (mono, gi) pairs to row positions (as produced by
        module_monomials).  Returns a list of {row: coeff} dicts.
        """
        h = self.hopf
        ring = h.ring
        alph = h.alphabet
        cols = []
        for r in self.relations:
            some = next(iter(r))
            rdeg = alph.mono_degree(some[0]) + self.generators[some[1]].degree
            rem = t - rdeg
            if rem < 0:
                continue
            for mult in basis_in_degree(alph, rem, subset=h.a_names):
                col = {}
                for (mono, gi), c in r.items():
                    hit = mono_mul(alph, mult, mono)
                    if hit is None:
                        continue
                    sign, m = hit
                    cc = ring.mul(ring.coerce(sign), c)
                    row = index[(m, gi)]
                    s = ring.add(col.get(row, ring.zero), cc)
                    if ring.is_zero(s):
                        col.pop(row, None)
                    else:
                        col[row] = s
                if col:
                    cols.append(col)
        return cols

    def coefficient_regime(self):
        """FREE (no relations), MODP (p kills everything), or ZPRES."""
        if not self.relations:
            return "FREE"
        p = self.hopf.prime
        killed = set()
        for r in self.relations:
            if len(r) == 1:
                ((mono, gi), c) = next(iter(r.items()))
                if not mono and self.hopf.ring.val(c) == 1:
                    killed.add(gi)
        if killed == set(range(len(self.generators))):
            return "MODP"
        return "ZPRES"

    def __eq__(self, other):
        return (isinstance(other, Comodule)
                and self.hopf.prime == other.hopf.prime
                and self.hopf.cap == other.hopf.cap
                and self.name == other.name
                and self.generators == other.generators
                and self.relations == other.relations
                and self.coaction == other.coaction)

    def __repr__(self):
        return "Comodule(%r, %d generators, %d relations)" % (
            self.name, len(self.generators), len(self.relations))


def check_comodule(M: Comodule) -> AxiomReport:
    """Counit, degree, and coassociativity checks; returns a report."""
    report = AxiomReport()
    h = M.hopf
    ring, alph, cap = h.ring, h.alphabet, h.cap
    try:
        M._validate()
    except Exception as exc:
        report.record("presentation", M.name, None,
                      "%s: %s" % (type(exc).__name__, exc))
        return report

    for gi, g in enumerate(M.generators):
        def chk_coassoc(gi=gi, g=g):
            psi = M.coaction[gi]
            lhs = {}
            rhs = {}
            for (W, gj), c in psi.items():
                part = h.diag_of_mono(W).scale(c)
                if gj in lhs:
                    lhs[gj] = lhs[gj].add(part)
                else:
                    lhs[gj] = part
                for (W2, gk), c2 in M.coaction[gj].items():
                    term = TensorPoly(ring, alph, cap, 2,
                                      {(W, W2): ring.mul(c, c2)})
                    if gk in rhs:
                        rhs[gk] = rhs[gk].add(term)
                    else:
                        rhs[gk] = term
            targets = set(lhs) | set(rhs)
            for gk in targets:
                L = h.push_left(lhs[gk]) if gk in lhs else None
                R = h.push_left(rhs[gk]) if gk in rhs else None
                if L is None or R is None or L != R:
                    report.record(
                        "coassociativity", g.name, g.degree,
                        "triple coactions differ at target %s"
                        % M.generators[gk].name)
                    break

        try:
            chk_coassoc()
        except Exception as exc:
            report.record("coassociativity", g.name, g.degree,
                          "%s: %s" % (type(exc).__name__, exc))
    return report


# -- preset builders -----------------------------------------------------------


def free_comodule(h: HopfAlgebroid, name="BP", shift=(0, 0)) -> Comodule:
    """The base ring as a comodule over itself."""
    g = Generator("g0", 0, shift)
    return Comodule(h, name, [g], [], {0: {((), 0): h.ring.one}})


def cyclic_quotient(h: HopfAlgebroid, k, name=None, shift=(0, 0)) -> Comodule:
    """Quotient of the base ring by p^k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if name is None:
        name = "BP/%d" % (h.prime ** k)
    g = Generator("g0", 0, shift)
    rel = {((), 0): h.ring.coerce(h.prime ** k)}
    return Comodule(h, name, [g], [rel], {0: {((), 0): h.ring.one}})


def bp_mod_In(h: HopfAlgebroid, n, name=None, shift=(0, 0)) -> Comodule:
    """Quotient of the base ring by (p, v1, ..., vn); n = -1 gives it all.

    The n-th ideal in the tower: n = 0 kills p only.
    """
    if n < -1:
        raise ValueError("n must be at least -1")
    if n == -1:
        return free_comodule(h, name or "BP", shift)
    if n > len(h.a_names):
        raise CapTooSmall(
            "cap %d does not reach v%d (have %d base generators)"
            % (h.cap, n, len(h.a_names)))
    if name is None:
        name = "BP/I%d" % n
    g = Generator("g0", 0, shift)
    rels = [{((), 0): h.ring.coerce(h.prime)}]
    for i in range(1, n + 1):
        vi = h.alphabet.index("v%d" % i)
        rels.append({(((vi, 1),), 0): h.ring.one})
    return Comodule(h, name, [g], rels, {0: {((), 0): h.ring.one}})


def _real_extension_layer8(h: HopfAlgebroid) -> Comodule:
    """Second summand of the Chow-8 layer over the reals.

    Generators e2 and e1 with v1*e2 = -2*e1; the coaction of e1 picks up
    t1|e2, which is forced by compatibility with the relation: applying
    the coaction to v1*e2 + 2*e1 gives eta_R(v1)|e2 + 2|e1, a Gamma
    multiple of the relation itself.
    """
    e2 = Generator("e2", 0, (0, -4))
    e1 = Generator("e1", 2, (2, -3))
    v1 = h.alphabet.index("v1")
    t1 = h.alphabet.index("t1")
    rel = {(((v1, 1),), 0): h.ring.one, ((), 1): h.ring.coerce(2)}
    coaction = {
        0: {((), 0): h.ring.one},
        1: {((), 1): h.ring.one, (((t1, 1),), 0): h.ring.one},
    }
    return Comodule(h, "R-layer8-tau4", [e2, e1], [rel], coaction)


def real_layer(h: HopfAlgebroid, n):
    """Chow-degree-n layer over the reals: a list of summands.

    Tabulated for 0 <= n <= 8 only.
    """
    if h.prime != 2:
        raise ValueError("real layers live at p=2")
    if n < 0 or n > 8:
        raise OutOfTabulatedRange(
            "real layers are tabulated for 0 <= n <= 8, got %d" % n)
    if n == 0:
        return [free_comodule(h, "BP", (0, 0))]
    if n in (1, 2):
        return [cyclic_quotient(h, 1, "R-layer%d" % n, (-n, -n))]
    if n in (3, 5, 6):
        return [bp_mod_In(h, 1, "R-layer%d" % n, (-n, -n))]
    if n == 4:
        return [bp_mod_In(h, 1, "R-layer4-rho", (-4, -4)),
                free_comodule(h, "R-layer4-tau2", (0, -2))]
    if n == 7:
        return [bp_mod_In(h, 2, "R-layer7", (-7, -7))]
    return [bp_mod_In(h, 2, "R-layer8-rho", (-8, -8)),
            _real_extension_layer8(h)]


def _is_odd_prime_power(q):
    if q < 3 or q % 2 == 0:
        return False
    for p in range(3, q + 1, 2):
        if q % p == 0:
            k = q
            while k % p == 0:
                k //= p
            return k == 1
    return False


def finite_field_layer(h: HopfAlgebroid, q, n):
    """Chow-degree-n layer over the field with q elements (q odd).

    Concentrated in Chow degrees 0 and 2w-1; the odd layers are cyclic
    quotients of order the 2-part of q^w - 1.
    """
    if not _is_odd_prime_power(q):
        raise NotOddPrimePower("q=%r is not an odd prime power" % (q,))
    if h.prime != 2:
        raise ValueError("finite-field layers live at p=2")
    if n < 0:
        raise ValueError("Chow degree must be nonnegative")
    if n == 0:
        return [free_comodule(h, "BP", (0, 0))]
    if n % 2 == 0:
        return []
    w = (n + 1) // 2
    val = 0
    m = q ** w - 1
    while m % 2 == 0:
        val += 1
        m //= 2
    return [cyclic_quotient(h, val, "Fq%d-layer%d" % (q, n), (-1, -w))]


def complex_layer(h: HopfAlgebroid, n):
    """Chow-degree-n layer over the complex numbers."""
    if n < 0:
        raise ValueError("Chow degree must be nonnegative")
    if n % 2:
        return []
    return [free_comodule(h, "C-layer%d" % n, (0, -(n // 2)))]


# -- bidegree tables ----------------------------------------------------------------


def module_bidegree_table(summands, t_max):
    """Underlying-module data per motivic bidegree, up to degree t_max.

    Returns {(p, q): (free_rank, sorted list of torsion orders)} for the
    direct sum of the given comodules, via elementary-divisor reduction
    of each homogeneous piece.  The motivic bidegree of a base monomial
    of internal degree d is (d, d/2).
    """
    from .linalg import Matrix, subquotient_structure
    table = {}
    for M in summands:
        h = M.hopf
        ring = h.ring
        for t in range(0, t_max + 1, 2):
            basis = M.module_monomials(t)
            if not basis:
                continue
            groups = {}
            for row, (mono, gi) in enumerate(basis):
                d = h.alphabet.mono_degree(mono)
                shift = M.generators[gi].shift
                bid = (shift[0] + d, shift[1] + d // 2)
                groups.setdefault(bid, []).append(row)
            index = {key: i for i, key in enumerate(basis)}
            cols = M.relation_columns(t, index)
            for bid, rows in groups.items():
                sub = {r: i for i, r in enumerate(rows)}
                subcols = []
                for col in cols:
                    if any(r in sub for r in col):
                        if not all(r in sub for r in col):
                            raise DegreeMismatch(
                                "relation is not homogeneous in motivic "
                                "bidegree")
                        subcols.append({sub[r]: c for r, c in col.items()})
                B = Matrix.identity(ring, len(rows))
                C = Matrix.from_cols(ring, len(rows), subcols)
                q = subquotient_structure(B, C)
                free, tors = q.free_rank, sorted(q.torsion)
                if free or tors:
                    old = table.get(bid, (0, []))
                    table[bid] = (old[0] + free, sorted(old[1] + tors))
    return {k: (f, tor) for k, (f, tor) in table.items() if f or tor}


# -- text format ------------------------------------------------------------------------


def render_comodule(M: Comodule) -> str:
    """Text form of a presentation; inverse of parse_comodule."""
    h = M.hopf
    alph = h.alphabet
    lines = ["novikov comodule v1", "name: %s" % M.name]
    for g in M.generators:
        lines.append("generator %s %d %d %d"
                     % (g.name, g.degree, g.shift[0], g.shift[1]))

    def term_text(coeff, mono, gname):
        mono_txt = alph.render_mono(mono)
        txt = render_coeff(coeff)
        parts = []
        if txt != "1":
            parts.append(txt)
        if mono:
            parts.append(mono_txt)
        parts.append(gname)
        return "*".join(parts)

    def combo_text(terms, keyfun):
        pieces = []
        for key in sorted(terms, key=keyfun):
            c = terms[key]
            mono, gi = key
            neg = False
            if not h.ring.is_field or h.ring.p is None:
                neg = c < 0
                if neg:
                    c = -c
            body = term_text(c, mono, M.generators[gi].name)
            pieces.append(("-" if neg else "+", body))
        sign0, body0 = pieces[0]
        out = ("-" + body0) if sign0 == "-" else body0
        for sign, body in pieces[1:]:
            out += " %s %s" % (sign, body)
        return out

    def keyfun(key):
        mono, gi = key
        return (gi, alph.mono_sort_key(mono))

    for r in M.relations:
        lines.append("relation " + combo_text(r, keyfun))
    for gi, g in enumerate(M.generators):
        psi = M.coaction[gi]
        pieces = []
        for (mono, gj) in sorted(psi, key=keyfun):
            c = psi[(mono, gj)]
            neg = False
            if not h.ring.is_field or h.ring.p is None:
                neg = c < 0
                if neg:
                    c = -c
            txt = render_coeff(c)
            mono_txt = alph.render_mono(mono)
            if txt != "1":
                mono_txt = "%s*%s" % (txt, mono_txt)
            body = "%s|%s" % (mono_txt, M.generators[gj].name)
            pieces.append(("-" if neg else "+", body))
        sign0, body0 = pieces[0]
        out = ("-" + body0) if sign0 == "-" else body0
        for sign, body in pieces[1:]:
            out += " %s %s" % (sign, body)
        lines.append("coaction %s: %s" % (g.name, out))
    return "\n".join(lines) + "\n"


def _syntax_error(lineno, col, msg):
    return ComoduleSyntaxError("line %d, column %d: %s" % (lineno, col, msg))


def parse_comodule(h: HopfAlgebroid, text: str) -> Comodule:
    """Parse the documented comodule format against a Hopf algebroid.

    Errors carry line and column positions.
    """
    from .poly import split_signed_terms
    ring, alph = h.ring, h.alphabet
    lines = text.splitlines()
    if not lines or lines[0].strip() != "novikov comodule v1":
        raise _syntax_error(1, 1, "missing 'novikov comodule v1' header")
    name = None
    generators = []
    gen_index = {}
    relations = []
    coaction = {}

    def parse_gen_combo(body, lineno, col0):
        """Signed sum of base-monomial * generator terms."""
        try:
            signed = split_signed_terms(body)
        except Exception as exc:
            raise _syntax_error(lineno, col0, str(exc))
        combo = {}
        for sgn, termtext in signed:
            factors = termtext.split("*")
            gname = None
            rest = []
            for f in factors:
                if f in gen_index and gname is None:
                    gname = f
                else:
                    rest.append(f)
            if gname is None:
                raise _syntax_error(lineno, col0,
                                    "term %r names no generator" % termtext)
            try:
                hit = parse_term(ring, alph, "*".join(rest) if rest else "1")
            except Exception as exc:
                raise _syntax_error(lineno, col0, str(exc))
            if hit is None:
                continue
            c, mono = hit
            if sgn < 0:
                c = ring.neg(c)
            key = (mono, gen_index[gname])
            s = ring.add(combo.get(key, ring.zero), c)
            if ring.is_zero(s):
                combo.pop(key, None)
            else:
                combo[key] = s
        return combo

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("name:"):
            name = line[len("name:"):].strip()
            continue
        if line.startswith("generator "):
            parts = line.split()
            if len(parts) != 5:
                raise _syntax_error(lineno, len("generator ") + 1,
                                    "expected: generator NAME DEG A B")
            try:
                g = Generator(parts[1], int(parts[2]),
                              (int(parts[3]), int(parts[4])))
            except ValueError:
                raise _syntax_error(lineno, len("generator ") + 1,
                                    "non-integer generator data")
            except DegreeMismatch as exc:
                raise DegreeMismatch("line %d: %s" % (lineno, exc))
            if g.name in gen_index:
                raise _syntax_error(lineno, len("generator ") + 1,
                                    "duplicate generator %s" % g.name)
            gen_index[g.name] = len(generators)
            generators.append(g)
            continue
        if line.startswith("relation "):
            body = line[len("relation "):]
            try:
                combo = parse_gen_combo(body, lineno, len("relation ") + 1)
            except ComoduleSyntaxError:
                raise
            except Exception as exc:
                raise _syntax_error(lineno, len("relation ") + 1, str(exc))
            if combo:
                relations.append(combo)
            continue
        if line.startswith("coaction "):
            head, sep, body = line[len("coaction "):].partition(":")
            gname = head.strip()
            if not sep:
                raise _syntax_error(lineno, len("coaction ") + 1,
                                    "missing ':' in coaction line")
            if gname not in gen_index:
                raise _syntax_error(lineno, len("coaction ") + 1,
                                    "unknown generator %r" % gname)
            gi = gen_index[gname]
            try:
                signed = split_signed_terms(body)
            except Exception as exc:
                raise _syntax_error(lineno, line.index(":") + 2, str(exc))
            psi = {}
            for sgn, termtext in signed:
                legs = termtext.split("|")
                if len(legs) != 2:
                    raise _syntax_error(lineno, line.index(":") + 2,
                                        "coaction term %r needs one '|'"
                                        % termtext)
                wtxt, gtxt = legs
                if gtxt not in gen_index:
                    raise _syntax_error(lineno, line.index(":") + 2,
                                        "unknown generator %r" % gtxt)
                try:
                    hit = parse_term(ring, alph, wtxt)
                except Exception as exc:
                    raise _syntax_error(lineno, line.index(":") + 2,
                                        str(exc))
                if hit is None:
                    continue
                c, mono = hit
                if sgn < 0:
                    c = ring.neg(c)
                key = (mono, gen_index[gtxt])
                s = ring.add(psi.get(key, ring.zero), c)
                if ring.is_zero(s):
                    psi.pop(key, None)
                else:
                    psi[key] = s
            coaction[gi] = psi
            continue
        raise _syntax_error(lineno, 1, "unrecognized line %r" % line)

    if name is None:
        name = "comodule"
    if not generators:
        raise _syntax_error(len(lines), 1, "no generators defined")
    return Comodule(h, name, generators, relations, coaction)
