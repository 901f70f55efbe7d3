import os

import pytest

from novikov.comodule import (Comodule, Generator, bp_mod_In, check_comodule,
                              complex_layer, cyclic_quotient,
                              finite_field_layer, free_comodule,
                              module_bidegree_table, parse_comodule,
                              real_layer, render_comodule)
from novikov.errors import (AxiomViolation, CapTooSmall, ComoduleSyntaxError,
                            DegreeMismatch, NotOddPrimePower,
                            OutOfTabulatedRange)
from novikov.hopf import build_bp
from oracle_real import real_bidegree_table

GOLDEN = os.path.join(os.path.dirname(__file__), "..", "src", "novikov",
                      "golden")


@pytest.fixture(scope="module")
def h12():
    return build_bp(2, 12)


@pytest.fixture(scope="module")
def h16():
    return build_bp(2, 16)


@pytest.fixture(scope="module")
def h20():
    return build_bp(2, 20)


# -- presets -----------------------------------------------------------------


def test_bp_mod_In_presets(h12):
    bp = bp_mod_In(h12, -1)
    assert bp.relations == []
    assert len(bp.generators) == 1
    i0 = bp_mod_In(h12, 0)
    assert len(i0.relations) == 1
    assert i0.coefficient_regime() == "MODP"
    i2 = bp_mod_In(h12, 2)
    assert len(i2.relations) == 3
    assert i2.coefficient_regime() == "MODP"
    assert bp.coefficient_regime() == "FREE"


def test_bp_mod_In_needs_generator_in_range(h12):
    with pytest.raises(CapTooSmall):
        bp_mod_In(h12, 3)


def test_cyclic_quotient(h12):
    m = cyclic_quotient(h12, 2)
    assert m.name == "BP/4"
    ((mono, gi), c) = next(iter(m.relations[0].items()))
    assert mono == () and gi == 0 and c == 4
    assert m.coefficient_regime() == "ZPRES"
    with pytest.raises(ValueError):
        cyclic_quotient(h12, 0)


def test_presets_pass_checks(h16):
    mods = [bp_mod_In(h16, n) for n in range(-1, 3)]
    mods.append(cyclic_quotient(h16, 3))
    for n in range(9):
        mods.extend(real_layer(h16, n))
    mods.extend(finite_field_layer(h16, 5, 1))
    for m in mods:
        report = check_comodule(m)
        assert report.ok, "%s: %s" % (m.name, report)


def test_generator_validation():
    with pytest.raises(DegreeMismatch):
        Generator("g0", 3)
    with pytest.raises(DegreeMismatch):
        Generator("g0", -2)


def test_missing_coaction_names_generator(h12):
    g = Generator("g0", 0)
    with pytest.raises(AxiomViolation) as exc:
        Comodule(h12, "X", [g], [], {})
    assert "g0" in str(exc.value)


def test_coaction_needs_unit_term(h12):
    g = Generator("g0", 0)
    with pytest.raises(AxiomViolation) as exc:
        Comodule(h12, "X", [g], [], {0: {((), 0): h12.ring.coerce(2)}})
    assert "unit term" in str(exc.value)


def test_coaction_terms_must_have_gamma_part(h12):
    ring = h12.ring
    g0 = Generator("g0", 0)
    g1 = Generator("g1", 2)
    v1 = h12.alphabet.index("v1")
    coact = {0: {((), 0): ring.one},
             1: {((), 1): ring.one, (((v1, 1),), 0): ring.one}}
    with pytest.raises(AxiomViolation) as exc:
        Comodule(h12, "X", [g0, g1], [], coact)
    assert "Gamma part" in str(exc.value)


def test_inhomogeneous_relation_rejected(h12):
    ring = h12.ring
    g = Generator("g0", 0)
    v1 = h12.alphabet.index("v1")
    rel = {((), 0): ring.coerce(2), (((v1, 1),), 0): ring.one}
    with pytest.raises(DegreeMismatch):
        Comodule(h12, "X", [g], [rel], {0: {((), 0): ring.one}})


def test_coassociativity_detects_fake_primitive(h12):
    ring = h12.ring
    t1 = h12.alphabet.index("t1")
    t2 = h12.alphabet.index("t2")
    a0 = Generator("a0", 6)
    a2 = Generator("a2", 2)
    b0 = Generator("b0", 0)

    good = {0: {((), 0): ring.one, (((t1, 1),), 1): ring.one},
            1: {((), 1): ring.one}}
    m = Comodule(h12, "good", [a2, b0], [], good)
    assert check_comodule(m).ok

    bad = {0: {((), 0): ring.one, (((t2, 1),), 1): ring.one},
           1: {((), 1): ring.one}}
    m = Comodule(h12, "bad", [a0, b0], [], bad)
    report = check_comodule(m)
    assert not report.ok
    assert any(v["axiom"] == "coassociativity" for v in report.violations)


# -- real layers vs the brute-force enumerator ---------------------------------


def test_real_layers_match_enumerator(h16):
    for n in range(9):
        layers = real_layer(h16, n)
        mine = module_bidegree_table(layers, 16)
        oracle = real_bidegree_table(n, 16)
        assert mine == oracle, "Chow degree %d disagrees" % n


def test_real_layer_range(h16):
    with pytest.raises(OutOfTabulatedRange):
        real_layer(h16, 9)
    with pytest.raises(OutOfTabulatedRange):
        real_layer(h16, -1)


def test_real_layer8_extension_identifies_v1e2_with_2e1(h16):
    ext = real_layer(h16, 8)[1]
    assert ext.coefficient_regime() == "ZPRES"
    table = module_bidegree_table([ext], 2)
    assert table == {(0, -4): (1, []), (2, -3): (1, [])}


def test_real_layer4_has_free_summand(h16):
    layers = real_layer(h16, 4)
    assert len(layers) == 2
    regimes = sorted(m.coefficient_regime() for m in layers)
    assert regimes == ["FREE", "MODP"]


# -- tower consistency ------------------------------------------------------------


def _partition_count(t, parts):
    ways = [1] + [0] * t
    for d in parts:
        for s in range(d, t + 1):
            ways[s] += ways[s - d]
    return ways[t]


def test_tower_ranks_match_partition_counts(h20):
    degs = [h20.alphabet.degrees[h20.alphabet.index(n)]
            for n in h20.a_names]
    for n in range(0, 4):
        if n > len(h20.a_names):
            break
        m = bp_mod_In(h20, n)
        table = module_bidegree_table([m], 20)
        for t in range(0, 21, 2):
            got = sum(len(tors) + free
                      for (pp, qq), (free, tors) in table.items()
                      if pp == t)
            expected = _partition_count(t, degs[n:])
            assert got == expected, (n, t)


def test_bp_table_is_free(h12):
    table = module_bidegree_table([bp_mod_In(h12, -1)], 8)
    assert table[(0, 0)] == (1, [])
    assert table[(2, 1)] == (1, [])
    assert all(not tors for free, tors in table.values())


def test_cyclic_table_records_order(h12):
    table = module_bidegree_table([cyclic_quotient(h12, 2)], 4)
    assert table[(0, 0)] == (0, [4])
    assert table[(2, 1)] == (0, [4])


def test_straddling_relation_is_rejected(h12):
    ring = h12.ring
    x = Generator("x0", 0, (0, 0))
    y = Generator("y0", 0, (1, 1))
    rel = {((), 0): ring.one, ((), 1): ring.neg(ring.one)}
    coact = {0: {((), 0): ring.one}, 1: {((), 1): ring.one}}
    m = Comodule(h12, "X", [x, y], [rel], coact)
    with pytest.raises(DegreeMismatch):
        module_bidegree_table([m], 0)


# -- finite fields and complex numbers ------------------------------------------------


def test_finite_field_layers(h12):
    (m,) = finite_field_layer(h12, 5, 1)
    ((mono, gi), c) = next(iter(m.relations[0].items()))
    assert mono == () and c == 4
    assert m.generators[0].shift == (-1, -1)

    (m3,) = finite_field_layer(h12, 3, 1)
    ((_, _), c3) = next(iter(m3.relations[0].items()))
    assert c3 == 2

    (m9,) = finite_field_layer(h12, 9, 3)
    ((_, _), c9) = next(iter(m9.relations[0].items()))
    assert c9 == 16
    assert m9.generators[0].shift == (-1, -2)

    assert finite_field_layer(h12, 5, 2) == []
    assert finite_field_layer(h12, 7, 4) == []
    (bp,) = finite_field_layer(h12, 7, 0)
    assert bp.relations == []


def test_not_odd_prime_power_rejected(h12):
    for q in (1, 2, 4, 8, 15, 45, 0, -5):
        with pytest.raises(NotOddPrimePower):
            finite_field_layer(h12, q, 1)
    for q in (3, 5, 7, 9, 27, 121):
        finite_field_layer(h12, q, 0)


def test_complex_layers(h12):
    (m,) = complex_layer(h12, 4)
    assert m.generators[0].shift == (0, -2)
    assert m.relations == []
    assert complex_layer(h12, 3) == []
    (m0,) = complex_layer(h12, 0)
    assert m0.generators[0].shift == (0, 0)


# -- text format ---------------------------------------------------------------------


def test_round_trip_presets(h16):
    mods = [bp_mod_In(h16, -1), bp_mod_In(h16, 0), bp_mod_In(h16, 2),
            cyclic_quotient(h16, 3)]
    for n in range(9):
        mods.extend(real_layer(h16, n))
    for m in mods:
        text = render_comodule(m)
        back = parse_comodule(h16, text)
        assert back == m, m.name
        assert render_comodule(back) == text


def test_parse_rejects_missing_header(h12):
    with pytest.raises(ComoduleSyntaxError) as exc:
        parse_comodule(h12, "name: X\n")
    assert "line 1, column 1" in str(exc.value)


def test_parse_error_carries_line_and_column(h12):
    text = ("novikov comodule v1\n"
            "name: X\n"
            "generator g0 0 0 0\n"
            "relation 2*q9\n"
            "coaction g0: 1|g0\n")
    with pytest.raises(ComoduleSyntaxError) as exc:
        parse_comodule(h12, text)
    msg = str(exc.value)
    assert "line 4" in msg and "column" in msg


def test_parse_rejects_odd_degree_with_line(h12):
    text = ("novikov comodule v1\n"
            "generator g0 3 0 0\n")
    with pytest.raises(DegreeMismatch) as exc:
        parse_comodule(h12, text)
    assert "line 2" in str(exc.value)


def test_parse_rejects_unknown_directive(h12):
    text = ("novikov comodule v1\n"
            "generator g0 0 0 0\n"
            "coactoin g0: 1|g0\n")
    with pytest.raises(ComoduleSyntaxError) as exc:
        parse_comodule(h12, text)
    assert "line 3" in str(exc.value)


def test_parse_rejects_missing_pipe(h12):
    text = ("novikov comodule v1\n"
            "generator g0 0 0 0\n"
            "coaction g0: g0\n")
    with pytest.raises(ComoduleSyntaxError) as exc:
        parse_comodule(h12, text)
    assert "'|'" in str(exc.value)


def test_parse_missing_coaction_line(h12):
    text = ("novikov comodule v1\n"
            "generator g0 0 0 0\n"
            "generator g1 2 0 0\n"
            "coaction g0: 1|g0\n")
    with pytest.raises(AxiomViolation) as exc:
        parse_comodule(h12, text)
    assert "g1" in str(exc.value)


def test_parse_comment_and_blank_lines(h12):
    text = ("novikov comodule v1\n"
            "# a comment\n"
            "\n"
            "name: X\n"
            "generator g0 0 0 0\n"
            "coaction g0: 1|g0\n")
    m = parse_comodule(h12, text)
    assert m.name == "X"


def test_golden_bp(h12):
    path = os.path.join(GOLDEN, "bp_p2_cap12.comod")
    with open(path) as fh:
        text = fh.read()
    assert render_comodule(bp_mod_In(h12, -1)) == text
    assert parse_comodule(h12, text) == bp_mod_In(h12, -1)


def test_golden_bp_mod_I2(h12):
    path = os.path.join(GOLDEN, "bp_mod_I2_p2_cap12.comod")
    with open(path) as fh:
        text = fh.read()
    assert render_comodule(bp_mod_In(h12, 2)) == text


def test_golden_real_layers(h16):
    path = os.path.join(GOLDEN, "real_layers_p2_cap16.comod")
    with open(path) as fh:
        text = fh.read()
    chunks = []
    for n in range(9):
        for m in real_layer(h16, n):
            chunks.append(render_comodule(m))
    assert "---\n".join(chunks) == text
    for chunk in text.split("---\n"):
        parse_comodule(h16, chunk)
