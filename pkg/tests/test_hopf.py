"""Structure-map tests for the cooperations pair and dual Steenrod algebra.

Frozen small-case expansions come first; they were checked by hand and
pin the sign conventions for everything downstream.
"""

import os

import pytest

from novikov.errors import AxiomViolation, CapTooSmall, ParseError
from novikov.hopf import (AugmentationIdeal, HopfAlgebroid, TensorPoly,
                          build_bp, build_dual_steenrod, build_quotient_P,
                          check_axioms, dump_hopf, ideal_gr_basis,
                          ideal_power_basis, load_hopf, parse_tensor,
                          render_tensor)
from novikov.linalg import FP, ZP, p_valuation
from novikov.poly import Poly, basis_in_degree, parse_poly, render_poly

GOLDEN = os.path.join(os.path.dirname(__file__), os.pardir,
                      "src", "novikov", "golden", "bp_p2_cap12.hopf")


def bp26():
    return build_bp(2, 6)


# -- frozen oracles ------------------------------------------------------------


def test_eta_r_v1():
    for p, cap in [(2, 6), (3, 16), (5, 48)]:
        h = build_bp(p, cap)
        expect = h.poly("v1 + %d*t1" % p)
        assert h.eta_R_table["v1"] == expect


def test_diag_t1_primitive():
    for p, cap in [(2, 6), (3, 16)]:
        h = build_bp(p, cap)
        one = Poly.one(h.ring, h.alphabet, h.cap)
        t1 = h.gen_poly("t1")
        expect = TensorPoly.of_polys([t1, one]).add(
            TensorPoly.of_polys([one, t1]))
        assert h.diag_table["t1"] == expect


def test_eta_r_v2_congruence():
    """eta_R(v2) - v2 - p*t2 lies in (I^2, v1*t1) at p=2."""
    h = bp26()
    diff = h.eta_R_table["v2"].sub(h.poly("v2 + 2*t2"))
    assert not diff.is_zero()
    iv1 = h.alphabet.index("v1")
    it1 = h.alphabet.index("t1")
    for mono, c in diff.terms.items():
        exps = dict(mono)
        weight = h.alphabet.mono_weight(h._apart(mono))
        val = p_valuation(c, 2)
        in_i2 = val + weight >= 2
        in_v1t1 = exps.get(iv1, 0) >= 1 and exps.get(it1, 0) >= 1
        assert in_i2 or in_v1t1, (mono, c)


def test_reduced_diag_t2():
    h = bp26()
    rd = h.reduced_diag_mono(((h.alphabet.index("t2"), 1),))
    t1 = h.alphabet.index("t1")
    v1 = h.alphabet.index("v1")
    assert rd.terms == {
        (((t1, 1),), ((t1, 2),)): h.ring.coerce(1),
        (((v1, 1), (t1, 1)), ((t1, 1),)): h.ring.coerce(-1),
    }


def test_reduced_diag_with_base_prefix():
    """reduced diagonal of v1*t1 is -2 t1|t1 (right-unit correction)."""
    h = bp26()
    v1 = h.alphabet.index("v1")
    t1 = h.alphabet.index("t1")
    rd = h.reduced_diag_mono(((v1, 1), (t1, 1)))
    assert rd.terms == {(((t1, 1),), ((t1, 1),)): h.ring.coerce(-2)}


def test_reduced_diag_of_t1_vanishes():
    h = bp26()
    rd = h.reduced_diag_mono(((h.alphabet.index("t1"), 1),))
    assert rd.is_zero()


def test_push_left():
    h = bp26()
    one = Poly.one(h.ring, h.alphabet, h.cap)
    x = TensorPoly.of_polys([one, h.poly("v1*t1")])
    out = h.push_left(x)
    t1 = h.alphabet.index("t1")
    v1 = h.alphabet.index("v1")
    assert out.terms == {
        (((v1, 1),), ((t1, 1),)): h.ring.coerce(1),
        (((t1, 1),), ((t1, 1),)): h.ring.coerce(2),
    }


def test_conjugation():
    h = build_bp(2, 14)
    assert h.conj_gen("t1") == h.poly("-t1")
    for name in ("t1", "t2", "t3"):
        assert h.conj(h.conj_gen(name)) == h.gen_poly(name)
    assert h.conj(h.eta_R_table["v1"]) == h.gen_poly("v1")


def test_counit_on_products():
    """(1|eps) of the memoized product comultiplication returns the input."""
    h = build_bp(2, 10)
    ring, alph, cap = h.ring, h.alphabet, h.cap
    for t in range(2, 11, 2):
        for mono in basis_in_degree(alph, t, subset=h.g_names):
            if not mono:
                continue
            D = h.diag_mono(mono)
            right = Poly.zero(ring, alph, cap)
            for (L, R), c in D.terms.items():
                if not R:
                    right = right.add(Poly.monomial(ring, alph, L, cap, c))
            assert right == Poly.monomial(ring, alph, mono, cap)


# -- axiom verification -----------------------------------------------------------


def test_bp_axioms():
    assert check_axioms(build_bp(2, 14)).ok
    assert check_axioms(build_bp(3, 16)).ok


def test_corrupted_diag_is_reported_not_raised():
    h = bp26()
    t1 = h.alphabet.index("t1")
    bad_diag = dict(h.diag_table)
    extra = TensorPoly(h.ring, h.alphabet, h.cap, 2,
                       {(((t1, 1),), ((t1, 1),)): 1})
    bad_diag["t2"] = bad_diag["t2"].add(extra)
    bad = HopfAlgebroid(h.ring, h.alphabet, h.cap, h.a_names, h.g_names,
                        h.eta_R_table, bad_diag, "bp", 2)
    report = check_axioms(bad)
    assert not report.ok
    axioms = {v["axiom"] for v in report.violations}
    assert "grading" in axioms or "coassociativity" in axioms
    # the corrupted generator is named; compatibility checks of other
    # generators that consume diag(t2) may flag too
    assert any(v["generator"] == "t2" for v in report.violations)


def test_missing_primitive_term_is_reported():
    h = bp26()
    t2 = h.alphabet.index("t2")
    bad_diag = dict(h.diag_table)
    drop = TensorPoly(h.ring, h.alphabet, h.cap, 2,
                      {(((t2, 1),), ()): -1})
    bad_diag["t2"] = bad_diag["t2"].add(drop)
    bad = HopfAlgebroid(h.ring, h.alphabet, h.cap, h.a_names, h.g_names,
                        h.eta_R_table, bad_diag, "bp", 2)
    report = check_axioms(bad)
    assert not report.ok
    assert any("t2" == v["generator"] for v in report.violations)


def test_right_leg_purity_enforced():
    h = bp26()
    v1 = h.alphabet.index("v1")
    t1 = h.alphabet.index("t1")
    bad_diag = dict(h.diag_table)
    bad_diag["t2"] = bad_diag["t2"].add(TensorPoly(
        h.ring, h.alphabet, h.cap, 2,
        {(((t1, 1),), ((v1, 1), (t1, 1))): 1}))
    with pytest.raises(AxiomViolation):
        HopfAlgebroid(h.ring, h.alphabet, h.cap, h.a_names, h.g_names,
                      h.eta_R_table, bad_diag, "bp", 2)


# -- dual Steenrod algebra -----------------------------------------------------------


def test_steenrod_p2_xi2():
    s = build_dual_steenrod(2, 15)
    one = Poly.one(s.ring, s.alphabet, s.cap)
    xi1 = s.gen_poly("xi1")
    xi2 = s.gen_poly("xi2")
    expect = (TensorPoly.of_polys([xi2, one])
              .add(TensorPoly.of_polys([xi1.mul(xi1), xi1]))
              .add(TensorPoly.of_polys([one, xi2])))
    assert s.diag_table["xi2"] == expect
    assert check_axioms(s).ok


def test_steenrod_p3():
    s = build_dual_steenrod(3, 20)
    assert check_axioms(s).ok
    assert "tau0" in s.g_names and "xi1" in s.g_names
    one = Poly.one(s.ring, s.alphabet, s.cap)
    tau1 = s.gen_poly("tau1")
    tau0 = s.gen_poly("tau0")
    xi1 = s.gen_poly("xi1")
    expect = (TensorPoly.of_polys([tau1, one])
              .add(TensorPoly.of_polys([xi1, tau0]))
              .add(TensorPoly.of_polys([one, tau1])))
    assert s.diag_table["tau1"] == expect


def test_steenrod_odd_signs():
    """tau generators square to zero and anticommute."""
    s = build_dual_steenrod(3, 20)
    tau0 = s.gen_poly("tau0")
    tau1 = s.gen_poly("tau1")
    assert tau0.mul(tau0).is_zero()
    ab = tau0.mul(tau1)
    ba = tau1.mul(tau0)
    assert ab == ba.neg()
    # Koszul sign inside a tensor square of an odd primitive-ish element
    one = Poly.one(s.ring, s.alphabet, s.cap)
    x = TensorPoly.of_polys([tau0, one]).add(TensorPoly.of_polys([one, tau0]))
    sq = x.mul(x)
    assert sq.is_zero()  # cross terms cancel in characteristic 3


def test_quotient_P():
    P = build_quotient_P(build_bp(2, 14))
    assert P.a_names == ()
    assert check_axioms(P).ok
    t1 = P.gen_poly("t1")
    t2 = P.gen_poly("t2")
    one = Poly.one(P.ring, P.alphabet, P.cap)
    expect = (TensorPoly.of_polys([t2, one])
              .add(TensorPoly.of_polys([t1, t1.mul(t1)]))
              .add(TensorPoly.of_polys([one, t2])))
    assert P.diag_table["t2"] == expect


# -- caps ----------------------------------------------------------------------------


def test_cap_too_small():
    with pytest.raises(CapTooSmall):
        build_bp(2, 1)
    with pytest.raises(CapTooSmall):
        build_bp(3, 3)
    with pytest.raises(CapTooSmall):
        build_dual_steenrod(2, 0)


def test_generator_count_tracks_cap():
    assert build_bp(2, 6).a_names == ("v1", "v2")
    assert build_bp(2, 13).a_names == ("v1", "v2")
    assert build_bp(2, 14).a_names == ("v1", "v2", "v3")
    assert build_dual_steenrod(2, 7).g_names == ("xi1", "xi2", "xi3")


# -- augmentation ideal ----------------------------------------------------------------


def test_ideal_power_basis():
    h = build_bp(2, 12)
    ideal = AugmentationIdeal(h)
    # degree-0 part of I^1 is spanned by p itself
    assert ideal.power_basis(1, 0) == [(1, ())]
    # degree-2 part of I^2 is spanned by p*v1
    v1 = h.alphabet.index("v1")
    assert ideal.power_basis(2, 2) == [(1, ((v1, 1),))]
    # whole ring in degree 2 when n <= 0
    assert ideal.power_basis(0, 2) == [(0, ((v1, 1),))]
    assert ideal_power_basis(h, 1, 0) == [(1, ())]


def test_ideal_gr_basis():
    h = build_bp(2, 12)
    # (I^1/I^2) in degree 0: the class of p alone
    assert ideal_gr_basis(h, 1, 0) == [(1, ())]
    # (I^2/I^3) in degree 2: the class of p*v1
    v1 = h.alphabet.index("v1")
    assert ideal_gr_basis(h, 2, 2) == [(1, ((v1, 1),))]
    # degree 4: v1^2 has weight 2 (no p factor); p^2*? none else
    assert ideal_gr_basis(h, 2, 4) == [(0, ((v1, 2),))]


# -- serialization ------------------------------------------------------------------------


def test_dump_load_roundtrip():
    h = build_bp(2, 12)
    text = dump_hopf(h)
    h2 = load_hopf(text)
    assert dump_hopf(h2) == text
    assert h2.eta_R_table == h.eta_R_table
    assert h2.diag_table == h.diag_table
    assert h2.a_names == h.a_names and h2.g_names == h.g_names


def test_golden_file():
    with open(GOLDEN) as fh:
        golden = fh.read()
    assert dump_hopf(build_bp(2, 12)) == golden
    h = load_hopf(golden)
    assert check_axioms(h).ok


def test_steenrod_dump_roundtrip():
    s = build_dual_steenrod(3, 20)
    text = dump_hopf(s)
    s2 = load_hopf(text)
    assert dump_hopf(s2) == text
    assert s2.diag_table == s.diag_table


def test_load_rejects_garbage():
    with pytest.raises(ParseError):
        load_hopf("not a dump\n")
    h = build_bp(2, 6)
    text = dump_hopf(h).replace("etaR v1: v1 + 2*t1\n", "")
    with pytest.raises(ParseError):
        load_hopf(text)


def test_tensor_render_parse_roundtrip():
    h = build_bp(2, 12)
    for name in h.g_names:
        tp = h.diag_table[name]
        text = render_tensor(tp)
        back = parse_tensor(h.ring, h.alphabet, text, h.cap, 2)
        assert back == tp
