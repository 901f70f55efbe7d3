import itertools
import os

import pytest

from novikov.cobar import (build_cobar, ext, ext_table_tsv, koszul_tor,
                           levin_index_one, minimal_resolution_ext,
                           render_cobar_element, yoneda_product)
from novikov.comodule import (Comodule, Generator, bp_mod_In,
                              cyclic_quotient, free_comodule, real_layer)
from novikov.errors import (AxiomViolation, OutOfRange, RingMismatch,
                            UnsupportedPresentation)
from novikov.hopf import build_bp, build_dual_steenrod, build_quotient_P
from oracle_dense import dense_ext_dims

GOLDEN = os.path.join(os.path.dirname(__file__), "..", "src", "novikov",
                      "golden")


@pytest.fixture(scope="module")
def h12():
    return build_bp(2, 12)


@pytest.fixture(scope="module")
def P12(h12):
    return build_quotient_P(h12)


@pytest.fixture(scope="module")
def st14():
    return build_dual_steenrod(2, 14)


@pytest.fixture(scope="module")
def bp_table(h12):
    return ext(h12, free_comodule(h12), 3, 8)


@pytest.fixture(scope="module")
def st_table(st14):
    return ext(st14, free_comodule(st14, name="F2"), 4, 14)


# -- bases ----------------------------------------------------------------


def test_word_basis_degree_two(P12):
    cx = build_cobar(P12, free_comodule(P12, name="F2"), 1, 4)
    words = cx.basis(1, 2)
    t1 = P12.alphabet.index("t1")
    assert words == [((), (((t1, 1),),), 0)]


def test_trivial_comodule_bottom_row(P12):
    cx = build_cobar(P12, free_comodule(P12, name="F2"), 2, 8)
    assert cx.dim(0, 0) == 1
    for t in range(1, 9):
        assert cx.dim(0, t) == 0


def test_bottom_row_is_the_base_ring(h12):
    cx = build_cobar(h12, free_comodule(h12), 1, 6)
    assert cx.dim(0, 0) == 1
    assert cx.dim(0, 2) == 1
    # v1^3 and v2
    assert cx.dim(0, 6) == 2


# -- differential invariants -------------------------------------------------


def test_differential_squares_to_zero_on_presets(h12):
    for M in [free_comodule(h12), cyclic_quotient(h12, 1),
              cyclic_quotient(h12, 2), bp_mod_In(h12, 2)]:
        build_cobar(h12, M, 3, 10)


def test_differential_squares_to_zero_extension_layer(h12):
    for M in real_layer(h12, 8):
        build_cobar(h12, M, 2, 8)


def test_differential_squares_to_zero_field(st14):
    build_cobar(st14, free_comodule(st14, name="F2"), 3, 10)


def test_incompatible_coaction_rejected(h12):
    # relation v1*e2 - 2*e1 forces a -t1|e2 term; +t1|e2 must be refused
    v1 = h12.alphabet.index("v1")
    t1 = h12.alphabet.index("t1")
    M = Comodule(
        h12, "bad",
        [Generator("e2", 0), Generator("e1", 2)],
        [{(((v1, 1),), 0): h12.ring.one, ((), 1): h12.ring.coerce(-2)}],
        {0: {((), 0): h12.ring.one},
         1: {((), 1): h12.ring.one, (((t1, 1),), 0): h12.ring.one}})
    with pytest.raises(AxiomViolation):
        build_cobar(h12, M, 1, 4)


def test_hopf_comodule_mismatch_rejected(h12):
    other = build_bp(2, 12)
    with pytest.raises(RingMismatch):
        build_cobar(h12, free_comodule(other), 1, 4)


def test_cap_validation(h12):
    with pytest.raises(ValueError):
        build_cobar(h12, free_comodule(h12), 1, 14)
    with pytest.raises(ValueError):
        build_cobar(h12, free_comodule(h12), -1, 4)


# -- Ext over the cooperations pair ----------------------------------------------


def test_ext_unit_spot(bp_table):
    assert bp_table.group(0, 0) == (1, [])
    assert bp_table.labels(0, 0) == ["g0"]


def test_ext_one_line_orders(bp_table):
    # the classical 1-line: cyclic of order 2, 4, 2, 16 at t = 2, 4, 6, 8
    assert bp_table.group(1, 2) == (0, [2])
    assert bp_table.group(1, 4) == (0, [4])
    assert bp_table.group(1, 6) == (0, [2])
    assert bp_table.group(1, 8) == (0, [16])
    assert bp_table.labels(1, 2) == ["[t1]*g0"]


def test_ext_alpha_powers(bp_table):
    assert bp_table.group(2, 4) == (0, [2])
    assert bp_table.group(3, 6) == (0, [2])


def test_ext_zero_stems_stay_empty(bp_table):
    # odd internal degrees never appear over an evenly graded pair
    for (s, t) in bp_table.entries:
        assert t % 2 == 0


def test_basis_order_independence(h12):
    M = free_comodule(h12)
    fwd = ext(h12, M, 3, 8)
    rev = ext(h12, M, 3, 8, reverse_basis=True)
    assert {k: v[:2] for k, v in fwd.entries.items()} == \
        {k: v[:2] for k, v in rev.entries.items()}


def test_truncation_stability():
    small = build_bp(2, 12)
    large = build_bp(2, 16)
    a = ext(small, free_comodule(small), 3, 8)
    b = ext(large, free_comodule(large), 3, 8)
    assert {k: v[:2] for k, v in a.entries.items()} == \
        {k: v[:2] for k, v in b.entries.items()}


# -- Ext over field coalgebras vs independent routes ---------------------------------


def test_dense_oracle_quotient(P12):
    table = ext(P12, free_comodule(P12, name="F2"), 2, 8)
    want = dense_ext_dims(P12, 2, 8)
    got = {k: table.dim_fp(*k) for k in table.entries
           if k[0] <= 2 and k[1] <= 8}
    assert got == want


def test_dense_oracle_steenrod(st14, st_table):
    want = dense_ext_dims(st14, 2, 8)
    got = {k: st_table.dim_fp(*k) for k in st_table.entries
           if k[0] <= 2 and k[1] <= 8}
    assert got == want


def test_minimal_resolution_steenrod(st14, st_table):
    mr = minimal_resolution_ext(st14, 4, 14)
    for s in range(5):
        for t in range(15):
            assert st_table.dim_fp(s, t) == mr.get((s, t), 0)


def test_minimal_resolution_quotient(P12):
    table = ext(P12, free_comodule(P12, name="F2"), 4, 12)
    mr = minimal_resolution_ext(P12, 4, 12)
    for s in range(5):
        for t in range(13):
            assert table.dim_fp(s, t) == mr.get((s, t), 0)


def test_minimal_resolution_needs_field(h12):
    with pytest.raises(UnsupportedPresentation):
        minimal_resolution_ext(h12, 2, 6)


def test_steenrod_low_stems(st_table):
    # h_i on the 1-line, h0*h1 = 0 gap at (2,3), c0 at (3,11)
    for i in range(4):
        assert st_table.dim_fp(1, 2 ** i) == 1
    assert st_table.dim_fp(1, 3) == 0
    assert st_table.dim_fp(2, 3) == 0
    assert st_table.dim_fp(3, 11) == 1


# -- presented coefficients over the base --------------------------------------------


def test_ext_mod_p_squared(h12):
    table = ext(h12, cyclic_quotient(h12, 2), 1, 4)
    assert table.group(0, 0) == (0, [4])
    assert table.group(0, 2) == (0, [2])
    assert table.labels(0, 2) == ["2*v1*g0"]


def test_ext_mod_p_bottom(h12):
    table = ext(h12, cyclic_quotient(h12, 1), 2, 8)
    # invariant prime: F_2[v1] on the 0-line in this range
    for t in (0, 2, 4, 6, 8):
        assert table.dim_fp(0, t) == 1
    assert table.labels(0, 2) == ["v1*g0"]
    assert table.dim_fp(1, 2) == 1


def test_ext_odd_prime_mod_p():
    h = build_bp(3, 16)
    table = ext(h, cyclic_quotient(h, 1), 1, 8)
    assert table.dim_fp(0, 0) == 1
    assert table.dim_fp(0, 4) == 1
    assert table.dim_fp(1, 4) == 1


# -- products ---------------------------------------------------------------------


def test_product_unit(st_table):
    one = (0, 0, 0)
    h2 = (1, 4, 0)
    left = yoneda_product(st_table, one, h2)
    right = yoneda_product(st_table, h2, one)
    assert left.free == [1] and right.free == [1]
    assert not left.is_zero


def test_product_h0_h1_vanishes(st_table):
    out = yoneda_product(st_table, (1, 1, 0), (1, 2, 0))
    assert out.s == 2 and out.t == 3
    assert out.is_zero


def test_product_h1_h2_vanishes(st_table):
    assert yoneda_product(st_table, (1, 2, 0), (1, 4, 0)).is_zero


def test_product_h0_square(st_table):
    out = yoneda_product(st_table, (1, 1, 0), (1, 1, 0))
    assert out.free == [1]


def test_product_associative_triples(st_table):
    gens = [(1, 1, 0), (1, 2, 0), (1, 4, 0)]
    for x, y, z in itertools.product(gens, repeat=3):
        s = x[0] + y[0] + z[0]
        t = x[1] + y[1] + z[1]
        if s > st_table.s_max or t > st_table.t_max:
            continue
        xy = yoneda_product(st_table, x, y)
        yz = yoneda_product(st_table, y, z)
        left = _push(st_table, xy, z, False)
        right = _push(st_table, yz, x, True)
        assert left == right, (x, y, z)


def _push(table, cls, other, other_on_left):
    """Multiply a coordinate class by a basis reference, by expanding."""
    coords = list(cls.free) + list(cls.torsion)
    total = None
    for i, c in enumerate(coords):
        if not c:
            continue
        ref = (cls.s, cls.t, i)
        part = (yoneda_product(table, other, ref) if other_on_left
                else yoneda_product(table, ref, other))
        vec = [c * x for x in (list(part.free) + list(part.torsion))]
        if total is None:
            total = vec
        else:
            total = [a + b for a, b in zip(total, vec)]
    if total is None or all(x % 2 == 0 for x in total):
        return ()
    return tuple(x % 2 for x in total)


def test_product_alpha1_powers(bp_table):
    a1 = (1, 2, 0)
    sq = yoneda_product(bp_table, a1, a1)
    assert (sq.s, sq.t) == (2, 4) and sq.torsion == [1]
    cube = yoneda_product(bp_table, (2, 4, 0), a1)
    assert (cube.s, cube.t) == (3, 6) and cube.torsion == [1]


def test_product_out_of_range(bp_table):
    with pytest.raises(OutOfRange):
        yoneda_product(bp_table, (2, 4, 0), (2, 4, 0))


def test_product_needs_cyclic_comodule(h12):
    M = real_layer(h12, 8)[1]
    table = ext(h12, M, 1, 4)
    with pytest.raises(UnsupportedPresentation):
        yoneda_product(table, (0, 0, 0), (0, 0, 0))


# -- Tor over the base ring ------------------------------------------------------------


def test_tor_of_free_module(h12):
    assert koszul_tor(free_comodule(h12), 3, 12) == {(0, 0): 1}


def test_tor_of_mod_p(h12):
    assert koszul_tor(cyclic_quotient(h12, 1), 3, 12) == {
        (0, 0): 1, (1, 0): 1}


def test_tor_of_residue_field_binomials(h12):
    # exterior pattern: one class per subset of {2, v1, v2}
    degrees = [0, 2, 6]
    want = {}
    for r in range(len(degrees) + 1):
        for sub in itertools.combinations(degrees, r):
            key = (r, sum(sub))
            if key[1] <= 12:
                want[key] = want.get(key, 0) + 1
    got = koszul_tor(bp_mod_In(h12, 2), 3, 12)
    assert got == want


# -- the vanishing index ---------------------------------------------------------------


def test_levin_free_module_vanishes(h12):
    out = levin_index_one(free_comodule(h12), 2, 2, 10)
    assert out[1]["vanishes"] and out[2]["vanishes"]
    assert out[1]["witnesses"] == []


def test_levin_mod_four_does_not_vanish(h12):
    out = levin_index_one(cyclic_quotient(h12, 2), 1, 2, 8)
    assert not out[1]["vanishes"]
    assert (1, 0) in out[1]["witnesses"]


def test_levin_zero_module_vacuous(h12):
    M = Comodule(h12, "zero", [Generator("g0", 0)],
                 [{((), 0): h12.ring.one}],
                 {0: {((), 0): h12.ring.one}})
    out = levin_index_one(M, 2, 2, 8)
    assert out[1] == {"vanishes": True, "witnesses": []}
    assert out[2] == {"vanishes": True, "witnesses": []}


# -- rendering ------------------------------------------------------------------------


def test_render_element_zero(h12):
    M = free_comodule(h12)
    assert render_cobar_element(h12, M, {}) == "0"


def test_render_element_signs(h12):
    M = free_comodule(h12)
    t1 = h12.alphabet.index("t1")
    v1 = h12.alphabet.index("v1")
    word_a = ((), (((t1, 1),),), 0)
    word_b = (((v1, 1),), (((t1, 1),),), 0)
    text = render_cobar_element(
        h12, M, {word_a: h12.ring.coerce(-1), word_b: h12.ring.coerce(3)})
    assert text == "-[t1]*g0 + 3*v1*[t1]*g0"


def test_tsv_golden(bp_table):
    got = ext_table_tsv(bp_table)
    path = os.path.join(GOLDEN, "ext_bp_p2_s3_t8.tsv")
    with open(path) as fh:
        assert fh.read() == got
