"""Tests for the graded polynomial layer.

Degree-basis counts are checked against generating-function values worked
out by hand; sign conventions and cap semantics are pinned by tiny
examples (v1*v1 truncates to zero at cap 2, expands at cap 8).
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from novikov.errors import (AlphabetMismatch, CapMismatch, CapTooSmall,
                            DegreeMismatch, ParseError)
from novikov.linalg import FP, QQ, ZP
from novikov.poly import (Alphabet, Poly, basis_in_degree, mono_mul,
                          parse_poly, render_poly)

BP2 = Alphabet(["v1", "v2"], [2, 6], weights=[1, 1])
MIXED = Alphabet(["a", "b", "x"], [1, 1, 2], parities=[1, 1, 0])
CAP = 24


def gen(name, exp=1, ring=ZP(2), alph=BP2, cap=CAP):
    return Poly.gen(ring, alph, name, cap, exp=exp)


def test_alphabet_basics():
    assert BP2.index("v2") == 1
    assert BP2.mono_degree(((0, 3),)) == 6
    assert BP2.mono_weight(((0, 2), (1, 1))) == 3
    with pytest.raises(ValueError):
        Alphabet(["x"], [0])
    with pytest.raises(ValueError):
        Alphabet(["x", "x"], [1, 2])


def test_basis_in_degree_order():
    # degree 6: v1^3 comes before v2 (descending exponent lex)
    assert basis_in_degree(BP2, 6) == [((0, 3),), ((1, 1),)]
    assert basis_in_degree(BP2, 0) == [()]
    assert basis_in_degree(BP2, 1) == []
    # degree 8: v1^4, v1*v2
    assert basis_in_degree(BP2, 8) == [((0, 4),), ((0, 1), (1, 1))]


def test_basis_subset():
    assert basis_in_degree(BP2, 6, subset=["v2"]) == [((1, 1),)]
    assert basis_in_degree(BP2, 6, subset=["v1"]) == [((0, 3),)]


def test_basis_counts_match_partition_function():
    # number of monomials in v1, v2 of degree 2n equals the number of
    # partitions of n into parts 1 and 3: floor(n/3) + 1
    for n in range(0, 12):
        assert len(basis_in_degree(BP2, 2 * n)) == n // 3 + 1


def test_basis_caps_odd_generators():
    assert basis_in_degree(MIXED, 2) == [((0, 1), (1, 1)), ((2, 1),)]


def test_mono_mul_signs():
    s1, m1 = mono_mul(MIXED, ((0, 1),), ((1, 1),))
    s2, m2 = mono_mul(MIXED, ((1, 1),), ((0, 1),))
    assert m1 == m2 == ((0, 1), (1, 1))
    assert s1 == 1 and s2 == -1
    assert mono_mul(MIXED, ((0, 1),), ((0, 1),)) is None


def test_cap_truncates_products():
    v1 = Poly.gen(ZP(2), BP2, "v1", 2)
    assert v1.mul(v1).is_zero()              # degree 4 > cap 2
    v1_wide = Poly.gen(ZP(2), BP2, "v1", 8)
    assert not v1_wide.mul(v1_wide).is_zero()


def test_cap_mismatch_is_an_error():
    with pytest.raises(CapMismatch):
        Poly.gen(ZP(2), BP2, "v1", 8).add(Poly.gen(ZP(2), BP2, "v1", 10))


def test_constructing_over_cap_is_an_error():
    with pytest.raises(CapTooSmall):
        Poly.monomial(ZP(2), BP2, ((0, 3),), 4)


def test_difference_of_squares():
    Z2 = ZP(2)
    alph = Alphabet(["v1", "t1"], [2, 2], weights=[1, 0])
    v1 = Poly.gen(Z2, alph, "v1", 8)
    t1 = Poly.gen(Z2, alph, "t1", 8)
    left = v1.add(t1.scale(2))
    right = v1.sub(t1.scale(2))
    assert left.mul(right) == v1.pow(2).sub(t1.pow(2).scale(4))


def test_poly_arithmetic():
    q = gen("v1", 3).pow(1).add(gen("v2").scale(4))
    assert q.coeff(((0, 3),)) == 1
    assert q.coeff(((1, 1),)) == 4
    assert q.degree() == 6
    assert q.sub(q).is_zero()
    with pytest.raises(DegreeMismatch):
        gen("v1").add(gen("v2")).degree()


def test_odd_square_is_zero():
    F3 = FP(3)
    a = Poly.gen(F3, MIXED, "a", 8)
    b = Poly.gen(F3, MIXED, "b", 8)
    assert a.mul(a).is_zero()
    assert a.mul(b).add(b.mul(a)).is_zero()


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        gen("v1").mul(Poly.gen(ZP(2), MIXED, "x", CAP))


def test_substitute_homogeneous():
    v1, v2 = gen("v1"), gen("v2")
    img = {"v1": v1.scale(2), "v2": v2.add(v1.pow(3))}
    q = v1.mul(v2).substitute(img)
    assert q == v1.mul(v2).scale(2).add(v1.pow(4).scale(2))


def test_substitute_distributes_over_multiply():
    v1, v2 = gen("v1"), gen("v2")
    img = {"v1": v1.add(v2.scale(0)), "v2": v2.sub(v1.pow(3).scale(3))}
    a = v1.pow(2).add(v2)
    b = v1.add(v2.scale(5))
    assert a.mul(b).substitute(img) == a.substitute(img).mul(b.substitute(img))


def test_substitute_rejects_wrong_degree():
    with pytest.raises(DegreeMismatch):
        gen("v1").substitute({"v1": gen("v2")})


def test_render_and_parse_roundtrip():
    Z2 = ZP(2)
    q = parse_poly(Z2, BP2, "v1^2 + 4*v1*v2 - 3", CAP)
    assert q.coeff(((0, 2),)) == 1
    assert q.coeff(((0, 1), (1, 1))) == 4
    assert q.coeff(()) == -3
    assert parse_poly(Z2, BP2, render_poly(q), CAP) == q
    assert render_poly(Poly.zero(Z2, BP2, CAP)) == "0"
    assert parse_poly(Z2, BP2, "0", CAP).is_zero()


def test_parse_fraction_coefficients():
    q = parse_poly(QQ, BP2, "1/2*v1 - 3/4", CAP)
    assert q.coeff(((0, 1),)).numerator == 1
    assert render_poly(q) == "-3/4 + 1/2*v1"


def test_parse_errors():
    Z2 = ZP(2)
    for bad in ["", "+", "v9", "v1^", "v1**v2", "2+*3"]:
        with pytest.raises(ParseError):
            parse_poly(Z2, BP2, bad, CAP)
    with pytest.raises(ParseError):
        parse_poly(Z2, BP2, "v1^2", 2)       # over the cap


def test_render_mod_p_has_no_minus():
    q = parse_poly(FP(5), BP2, "v1 - 3", CAP)
    assert render_poly(q) == "2 + v1"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.integers(-4, 4)), max_size=6))
def test_poly_roundtrip_random(data):
    Z3 = ZP(3)
    q = Poly.zero(Z3, BP2, CAP)
    for e1, e2, c in data:
        mono = tuple(p for p in [(0, e1), (1, e2)] if p[1])
        q = q.add(Poly.monomial(Z3, BP2, mono, CAP, c=c))
    assert parse_poly(Z3, BP2, render_poly(q), CAP) == q


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 12), st.integers(0, 12))
def test_mul_respects_grading(d1, d2):
    Z2 = ZP(2)
    b1 = basis_in_degree(BP2, d1)
    b2 = basis_in_degree(BP2, d2)
    if not b1 or not b2:
        return
    q = Poly.monomial(Z2, BP2, b1[0], CAP).mul(
        Poly.monomial(Z2, BP2, b2[0], CAP))
    if d1 + d2 <= CAP:
        assert q.degree() == d1 + d2
    else:
        assert q.is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
def test_mul_associative_below_cap(a, b, c):
    F3 = FP(3)
    alph = MIXED
    basis = [m for t in range(3) for m in basis_in_degree(alph, t)]
    x = Poly.monomial(F3, alph, basis[a % len(basis)], CAP)
    y = Poly.monomial(F3, alph, basis[b % len(basis)], CAP)
    z = Poly.monomial(F3, alph, basis[c % len(basis)], CAP)
    assert x.mul(y).mul(z) == x.mul(y.mul(z))
