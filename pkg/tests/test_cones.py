from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitroots.cones import (Cone, ConeSeries, dump_series, level_kernel,
                             series_product, split_factor_coeffs,
                             splitting_kernel, valuation_check, weight)
from unitroots.padic import (EisensteinElement, make_field_context,
                             teichmuller, theta_coeffs, zeta_p_embed)


@pytest.fixture(scope="module")
def ctx():
    return make_field_context(3, 1, 4)


# -- cones -------------------------------------------------------------------


def test_cone_membership_2d():
    C = Cone(2, [(1, 1), (1, -1)])
    assert C.contains((2, 0)) and C.contains((3, 1)) and C.contains((1, -1))
    assert not C.contains((0, 1)) and not C.contains((-1, 0))


def test_cone_ray_and_degenerate():
    ray = Cone(2, [(1, -1)])
    assert ray.contains((2, -2)) and ray.contains((0, 0))
    assert not ray.contains((1, 1)) and not ray.contains((1, -2))
    zero = Cone(2, [])
    assert zero.contains((0, 0)) and not zero.contains((1, 0))
    line = Cone(1, [(1,), (-1,)])
    assert line.contains((-5,)) and line.contains((7,))


def test_cone_3d():
    C = Cone(3, [(1, 0, 0), (0, 1, 0), (1, 1, 1)])
    assert C.contains((1, 1, 1)) and C.contains((2, 1, 1)) and C.contains((3, 2, 0))
    assert not C.contains((0, 0, 1)) and not C.contains((1, 1, 2))


def test_lattice_points_sorted_and_complete():
    C = Cone(2, [(1, 1), (1, -1)])
    pts = C.lattice_points(2)
    assert pts == ((0, 0), (1, -1), (1, 0), (1, 1), (2, 0))


# -- splitting factors -------------------------------------------------------


def test_split_factor_matches_theta(ctx):
    one = EisensteinElement.one(ctx)
    sf = split_factor_coeffs(ctx, 10, one, 3)
    th = theta_coeffs(ctx, 10)
    for i in range(11):
        assert (sf[i] - th[i]).is_zero_mod(sf[i].prec_pi)


def test_split_factor_twisted_matches_theta(ctx):
    c = EisensteinElement.from_zq(ctx, teichmuller(ctx, 2).coords)
    sf = split_factor_coeffs(ctx, 8, c, 3)
    th = theta_coeffs(ctx, 8, c=c)
    for i in range(9):
        assert (sf[i] - th[i]).is_zero_mod(sf[i].prec_pi)


def test_kloosterman_kernel_is_theta_convolution(ctx):
    one = EisensteinElement.one(ctx)
    H = splitting_kernel(ctx, [(one, (1,)), (one, (-1,))], 3, 12)
    th = theta_coeffs(ctx, 12)
    for w in (-3, -1, 0, 1, 2, 4):
        acc = EisensteinElement.zero(ctx)
        for i in range(13):
            j = i - w
            if 0 <= j <= 12 and i + j <= 12:
                acc = acc + th[i] * th[j]
        got = H.coeff((w,))
        assert (got - acc).is_zero_mod(min(got.prec_pi, acc.prec_pi))


def test_kernel_valuation_profile(ctx):
    one = EisensteinElement.one(ctx)
    H = splitting_kernel(ctx, [(one, (1,)), (one, (-1,))], 3, 12)
    # omega1 + omega2 = 2 for the Kloosterman family
    assert valuation_check(H, Fraction((3 - 1) ** 2, 3 ** 2 * 2))
    assert not valuation_check(H, Fraction(5, 1))


def test_level_kernel_untwisted_equals_splitting(ctx):
    one = EisensteinElement.one(ctx)
    H = splitting_kernel(ctx, [(one, (1,)), (one, (-1,))], 3, 10)
    L = level_kernel(ctx, [(one, one, (1,)), (one, one, (-1,))], 10)
    for e, c in H.coeffs.items():
        lc = L.coeff(e)
        assert (lc - c).is_zero_mod(min(lc.prec_pi, c.prec_pi))


def test_level_kernel_rejects_divergent_constant(ctx):
    one = EisensteinElement.one(ctx)
    two = EisensteinElement.from_int(ctx, 2)
    with pytest.raises(ValueError):
        level_kernel(ctx, [(one, two, (0,))], 8)


def test_kernel_reproduces_character_sums(ctx):
    """H evaluated at Teichmuller points gives zeta^f; summed, the exact S_1."""
    one = EisensteinElement.one(ctx)
    zeta = zeta_p_embed(ctx)
    H = splitting_kernel(ctx, [(one, (1,)), (one, (-1,))], 3, 12)
    t2 = EisensteinElement.from_zq(ctx, teichmuller(ctx, 2).coords)
    v1, v2 = H.eval([one]), H.eval([t2])
    assert (v1 - zeta * zeta).ord_pi() >= 4  # f(1,1) = 2
    assert (v2 - zeta).ord_pi() >= 4         # f(1,2) = 4 = 1 mod 3
    s = v1 + v2
    assert (s - EisensteinElement.from_int(ctx, -1)).ord_pi() >= 4


# -- series algebra ----------------------------------------------------------


def test_dilate_extract_project(ctx):
    one = EisensteinElement.one(ctx)
    two = one + one
    S = ConeSeries(2, {(1, 0): one, (0, 2): two, (2, 2): one})
    D = S.dilate(3, axes=[1])
    assert set(D.coeffs) == {(1, 0), (0, 6), (2, 6)}
    E = D.extract_dilation(3, axes=[1])
    assert set(E.coeffs) == set(S.coeffs)
    P = S.project([1])
    assert set(P.coeffs) == {(2,)}
    # extraction annihilates non-divisible exponents
    X = S.extract_dilation(2, axes=[0, 1])
    assert set(X.coeffs) == {(0, 1), (1, 1)}


def test_dump_series_format():
    S = ConeSeries(2, {(1, -2): 5, (0, 0): 7})
    out = dump_series(S, render=str)
    assert out.splitlines() == ["0 0\t7", "1 -2\t5"]


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(-3, 3)), st.integers(-9, 9),
                       max_size=4),
       st.dictionaries(st.tuples(st.integers(-3, 3)), st.integers(-9, 9),
                       max_size=4),
       st.dictionaries(st.tuples(st.integers(-3, 3)), st.integers(-9, 9),
                       max_size=4))
def test_series_mul_ring_axioms(d1, d2, d3):
    A, B, C = (ConeSeries(1, d) for d in (d1, d2, d3))
    cap = 100  # large enough that no truncation occurs
    ab = A.mul(B, cap)
    ba = B.mul(A, cap)
    assert {e: c for e, c in ab.coeffs.items() if c} == \
           {e: c for e, c in ba.coeffs.items() if c}
    left = ab.mul(C, cap)
    right = A.mul(B.mul(C, cap), cap)
    assert {e: c for e, c in left.coeffs.items() if c} == \
           {e: c for e, c in right.coeffs.items() if c}


def test_truncated_product_is_truncation_of_full():
    A = ConeSeries(1, {(i,): 1 for i in range(6)})
    B = ConeSeries(1, {(i,): i + 1 for i in range(6)})
    full = A.mul(B, 100)
    trunc = A.mul(B, 4)
    assert trunc.coeffs == {e: c for e, c in full.coeffs.items()
                            if weight(e) <= 4}
