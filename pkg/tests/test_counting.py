from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitroots.counting import (ClosedPoint, NeedMoreTerms, count_points,
                                enumerate_closed_points, exp_sum,
                                family_total_sum, fiber_l_series,
                                fiber_rational_l, fiber_unit_root_exact,
                                make_family, rational_reconstruct)
from unitroots.gf import gf_cache
from unitroots.padic import CyclotomicInt, EisensteinElement, make_field_context


@pytest.fixture(scope="module")
def kloosterman():
    return make_family(3, 1, [(1, (0,), (1,)), (1, (1,), (-1,))], "kloosterman")


@pytest.fixture(scope="module")
def points_q3():
    return enumerate_closed_points(3, 1, 1, 2)


def lam_one(points):
    return next(pt for pt in points[1] if pt.coords[0] == (1,))


# -- closed points -----------------------------------------------------------


def test_point_counts_q3():
    cnt = count_points(3, 1, 1, 6)
    assert [cnt[d] for d in range(1, 7)] == [2, 3, 8, 18, 48, 116]


def test_point_counts_q9():
    cnt = count_points(3, 2, 1, 4)
    assert [cnt[d] for d in range(1, 5)] == [8, 36, 240, 1620]


@pytest.mark.parametrize("p,a,s,dmax,qs", [(3, 1, 1, 6, 3), (3, 2, 1, 4, 9),
                                           (3, 1, 2, 3, 3), (2, 1, 2, 4, 2)])
def test_divisor_sum_identity(p, a, s, dmax, qs):
    cnt = count_points(p, a, s, dmax)
    for d in range(1, dmax + 1):
        total = sum(e * cnt[e] for e in range(1, d + 1) if d % e == 0)
        assert total == (qs ** d - 1) ** s


def test_orbit_representatives_are_lex_minimal():
    pts = enumerate_closed_points(3, 1, 1, 3)
    K = gf_cache(3, 3)
    Q1 = K.q - 1
    for pt in pts[3]:
        j = pt.logs[0]
        orbit = sorted((j * 3 ** i) % Q1 for i in range(3))
        assert len(set(orbit)) == 3  # exact degree
        assert j == orbit[0]


def test_rep_coords_match_logs():
    pts = enumerate_closed_points(3, 2, 1, 2)
    K = gf_cache(3, 4)
    for pt in pts[2]:
        assert pt.coords[0] == K.exp(pt.logs[0])


# -- exponential sums --------------------------------------------------------


def test_kloosterman_sums(kloosterman, points_q3):
    pt = lam_one(points_q3)
    assert exp_sum(kloosterman, pt, 1).rational_part() == -1
    assert exp_sum(kloosterman, pt, 2).rational_part() == 5
    assert exp_sum(kloosterman, pt, 3).rational_part() == 8


def test_kloosterman_l_polynomial(kloosterman, points_q3):
    pt = lam_one(points_q3)
    cs, _ = fiber_l_series(kloosterman, pt, 6)
    vals = [Fraction(c.rational_part()) for c in cs]
    assert vals == [1, -1, 3, 0, 0, 0, 0]
    num, den = rational_reconstruct(3, cs)
    assert [Fraction(c.rational_part()) for c in num] == [1, -1, 3]
    assert [Fraction(c.rational_part()) for c in den] == [1]


def test_linear_family_sums_and_l(points_q3):
    lin = make_family(3, 1, [(1, (1,), (1,))], "linear")
    for pt in points_q3[1]:
        for m in (1, 2, 3):
            assert exp_sum(lin, pt, m).rational_part() == -1
        L = fiber_rational_l(lin, pt)
        assert [Fraction(c.rational_part()) for c in L.num] == [1, -1]
        assert len(L.den) == 1


def test_total_sum_splits_over_fibers(kloosterman, points_q3):
    tot = family_total_sum(kloosterman, 1)
    acc = CyclotomicInt.zero(3)
    for pt in points_q3[1]:
        acc = acc + exp_sum(kloosterman, pt, 1)
    assert tot == acc
    # over F_9: degree-1 fibers contribute S_2, degree-2 reps S_1 twice
    tot2 = family_total_sum(kloosterman, 2)
    acc = CyclotomicInt.zero(3)
    for pt in points_q3[1]:
        acc = acc + exp_sum(kloosterman, pt, 2)
    for pt in points_q3[2]:
        acc = acc + exp_sum(kloosterman, pt, 1) * 2
    assert tot2 == acc


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 2), st.integers(-2, 2),
                          st.integers(-2, 2)), min_size=1, max_size=3,
                unique_by=lambda t: (t[1], t[2])))
def test_total_sum_identity_random_families(terms):
    fam = make_family(3, 1, [(c, (r,), (u,)) for c, r, u in terms])
    pts = enumerate_closed_points(3, 1, 1, 1)
    tot = family_total_sum(fam, 1)
    acc = CyclotomicInt.zero(3)
    for pt in pts[1]:
        acc = acc + exp_sum(fam, pt, 1)
    assert tot == acc
    assert all(Fraction(c).denominator == 1 for c in tot.coords)


# -- rational reconstruction -------------------------------------------------


def test_reconstruct_with_denominator():
    # (1 - T)/(1 - 3T): c_0 = 1, c_k = 2 * 3^(k-1)
    coeffs = [CyclotomicInt.one(3)]
    for k in range(1, 8):
        coeffs.append(CyclotomicInt(3, (2 * 3 ** (k - 1), 0)))
    num, den = rational_reconstruct(3, coeffs)
    assert [c.rational_part() for c in num] == [1, -1]
    assert [c.rational_part() for c in den] == [1, -3]


def test_reconstruct_needs_margin(kloosterman, points_q3):
    pt = lam_one(points_q3)
    cs, _ = fiber_l_series(kloosterman, pt, 3)
    with pytest.raises(NeedMoreTerms):
        rational_reconstruct(3, cs)


def test_three_term_family_has_cyclotomic_l():
    tt = make_family(3, 1, [(1, (1,), (1,)), (1, (1,), (-1,)),
                            (1, (-1,), (0,))], "three-term")
    pts = enumerate_closed_points(3, 1, 1, 1)
    L = fiber_rational_l(tt, pts[1][0])
    assert L.is_integral()
    assert any(c.rational_part() is None for c in L.num)


# -- exact unit roots --------------------------------------------------------


def test_kloosterman_unit_root_mod_27(kloosterman, points_q3):
    pt = lam_one(points_q3)
    res = fiber_unit_root_exact(kloosterman, pt, 3)
    ctx = make_field_context(3, 1, 3)
    pi0 = res.value
    assert res.location == "numerator"
    # pi0 = 7 mod 9 and satisfies z^2 - z + 3 = 0
    assert (pi0 - EisensteinElement.from_int(ctx, 7)).ord_pi() >= 4
    assert (pi0 * pi0 - pi0 + EisensteinElement.from_int(ctx, 3)).is_zero_mod(6)
    assert (pi0 - EisensteinElement.one(ctx)).ord_pi() >= 1


def test_kloosterman_unit_root_degree_two_fiber(kloosterman, points_q3):
    pt = points_q3[2][0]
    res = fiber_unit_root_exact(kloosterman, pt, 2, field_cap=5 * 10 ** 6)
    ctx = make_field_context(3, 2, 2)
    assert (res.value - EisensteinElement.one(ctx)).ord_pi() >= 1


def test_linear_family_unit_root_is_one(points_q3):
    lin = make_family(3, 1, [(1, (1,), (1,))], "linear")
    ctx = make_field_context(3, 1, 3)
    for pt in points_q3[1]:
        res = fiber_unit_root_exact(lin, pt, 3)
        assert (res.value - EisensteinElement.one(ctx)).is_zero_mod(6)


def test_twisted_f9_unit_root_is_one_unit():
    F9 = gf_cache(3, 2)
    tw = make_family(3, 2, [(1, (0,), (1,)), (F9.gen, (1,), (-1,))], "twisted")
    pts = enumerate_closed_points(3, 2, 1, 1)
    ctx = make_field_context(3, 2, 3)
    one = EisensteinElement.one(ctx)
    res = fiber_unit_root_exact(tw, pts[1][0], 3)
    assert (res.value - one).ord_pi() >= 1
