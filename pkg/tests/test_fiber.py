"""Truncated fiber operators: trace formula, determinants, unit roots.

Expected values come from exact character-sum counting over the residue
fields; valuation floors are full working precision (p-1)*N unless the
quantity itself carries less.
"""

import pytest

from unitroots.counting import (enumerate_closed_points, fiber_unit_root_exact,
                                make_family)
from unitroots.fiber import (RatioCertificate, chain_operator,
                             constant_character, delta_series,
                             det_unit_root_check, fiber_operator,
                             fiber_unit_root_padic, fredholm_coeffs,
                             power_traces, truncation_weight,
                             unit_root_by_ratios, verify_trace_formula)
from unitroots.padic import EisensteinElement, make_field_context, zeta_p_embed


@pytest.fixture(scope="module")
def kloosterman():
    return make_family(3, 1, [(1, (0,), (1,)), (1, (1,), (-1,))],
                       "kloosterman")


@pytest.fixture(scope="module")
def linear():
    return make_family(3, 1, [(1, (1,), (1,))], "linear")


@pytest.fixture(scope="module")
def three_term():
    return make_family(3, 1, [(1, (1,), (1,)), (1, (1,), (-1,)),
                              (1, (-1,), (0,))], "three-term")


@pytest.fixture(scope="module")
def points_q3():
    return enumerate_closed_points(3, 1, 1, 2)


def lam(points, log):
    return [p for p in points[1] if p.logs == (log,)][0]


# -- truncation weight -------------------------------------------------------


def test_truncation_weight_values():
    assert truncation_weight(3, 1, 3, 2) == 14
    assert truncation_weight(3, 2, 3, 2) == 11
    assert truncation_weight(3, 1, 2, 2) == 9
    assert truncation_weight(2, 1, 3, 2) == 24
    assert truncation_weight(3, 1, 2, 3) == 14


# -- trace formula against exact sums ----------------------------------------


def test_trace_formula_kloosterman_both_fibers(kloosterman, points_q3):
    for log in (0, 1):
        ords = verify_trace_formula(kloosterman, lam(points_q3, log), 3,
                                    ms=(1, 2))
        assert all(o >= 6 for o in ords)


def test_trace_formula_linear(linear, points_q3):
    ords = verify_trace_formula(linear, lam(points_q3, 0), 3, ms=(1, 2))
    assert all(o >= 6 for o in ords)


def test_trace_formula_constant_support(three_term, points_q3):
    # the x-constant term enters as a character scalar on the operator
    ctx = make_field_context(3, 1, 3)
    assert constant_character(three_term, lam(points_q3, 0), ctx) == 1
    assert constant_character(three_term, lam(points_q3, 1), ctx) == 2
    for log in (0, 1):
        ords = verify_trace_formula(three_term, lam(points_q3, log), 3,
                                    ms=(1, 2))
        assert all(o >= 6 for o in ords)


def test_trace_formula_degree_two(kloosterman, points_q3):
    ords = verify_trace_formula(kloosterman, points_q3[2][0], 2, ms=(1,))
    assert all(o >= 4 for o in ords)


# -- Fredholm determinant and the delta operator -----------------------------


def test_delta_of_det_is_l_polynomial(kloosterman, points_q3):
    # the Kloosterman fiber at lam = 1 has L = 1 - T + 3 T^2
    op = fiber_operator(kloosterman, lam(points_q3, 0), 3)
    ctx = op.ctx
    det = fredholm_coeffs(op, 4)
    ell = delta_series(ctx, det, 3)
    expected = [1, -1, 3, 0, 0]
    for have, want in zip(ell, expected):
        w = EisensteinElement.from_int(ctx, want)
        assert (have - w).ord_pi() >= 6


def test_delta_of_det_linear_family(linear, points_q3):
    # a single nondegenerate term gives L = 1 - T
    op = fiber_operator(linear, lam(points_q3, 0), 3)
    ctx = op.ctx
    ell = delta_series(ctx, fredholm_coeffs(op, 3), 3)
    expected = [1, -1, 0, 0]
    for have, want in zip(ell, expected):
        w = EisensteinElement.from_int(ctx, want)
        assert (have - w).ord_pi() >= 6


def test_fredholm_newton_matches_minor_expansion(kloosterman, points_q3):
    # force the division-free branch on the k < p range and compare
    from unitroots.fiber import _minor_sum
    op = fiber_operator(kloosterman, lam(points_q3, 0), 3, D=6)
    det = fredholm_coeffs(op, 2)
    e2 = _minor_sum(op, 2)
    assert (det[2] - e2).ord_pi() >= 6


# -- unit roots ---------------------------------------------------------------


def test_kloosterman_unit_root_mod_nine(kloosterman, points_q3):
    val, cert, op = fiber_unit_root_padic(kloosterman, lam(points_q3, 0), 3)
    seven = EisensteinElement.from_int(op.ctx, 7)
    assert (val - seven).ord_pi() >= 4  # 7 is the root mod 9 only
    assert cert.monotone()
    assert cert.stable_prec() >= 6
    # z^2 - z + 3 = 0 to full precision
    z = val
    resid = z * z - z + EisensteinElement.from_int(op.ctx, 3)
    assert resid.ord_pi() >= 6


def test_unit_root_matches_exact_route(kloosterman, three_term, points_q3):
    for fam in (kloosterman, three_term):
        pt = lam(points_q3, 0)
        val, cert, op = fiber_unit_root_padic(fam, pt, 3)
        exact = fiber_unit_root_exact(fam, pt, 3)
        assert (val - exact.value).ord_pi() >= 6


def test_linear_family_unit_root_is_one(linear, points_q3):
    val, cert, op = fiber_unit_root_padic(linear, lam(points_q3, 0), 3)
    assert (val - EisensteinElement.one(op.ctx)).ord_pi() >= 6


def test_trace_mode_agrees_with_column_mode(kloosterman, points_q3):
    op = fiber_operator(kloosterman, lam(points_q3, 0), 3)
    v1, c1 = unit_root_by_ratios(op)
    v2, c2 = unit_root_by_ratios(op, use_trace=True)
    assert (v1 - v2).ord_pi() >= min(c1.stable_prec(), c2.stable_prec())


def test_unit_root_stable_under_doubling(kloosterman, points_q3):
    pt = lam(points_q3, 0)
    v1, _, _ = fiber_unit_root_padic(kloosterman, pt, 3, D=14)
    v2, _, _ = fiber_unit_root_padic(kloosterman, pt, 3, D=20)
    assert (v1 - v2).ord_pi() >= 6


def test_det_check_rejects_wrong_value(kloosterman, points_q3):
    op = fiber_operator(kloosterman, lam(points_q3, 0), 3)
    det = fredholm_coeffs(op, 2)
    bad = EisensteinElement.from_int(op.ctx, 5)
    assert not det_unit_root_check(op.ctx, det, bad, 4)


def test_certificate_helpers():
    cert = RatioCertificate([], [2, 4, 6])
    assert cert.monotone() and cert.stable_prec() == 6
    assert not RatioCertificate([], [4, 2]).monotone()


# -- chain of level operators -------------------------------------------------


def test_chain_matches_direct_degree_two(kloosterman, three_term, points_q3):
    for fam, floor in ((kloosterman, 6), (three_term, 4)):
        N = 3 if fam is kloosterman else 2
        pt = points_q3[2][0]
        D = truncation_weight(fam.p, 2, N, fam.omega1 + fam.omega2)
        direct = fiber_operator(fam, pt, N, D)
        chain = chain_operator(fam, pt, N, D)
        for a, b in zip(power_traces(direct, 2), power_traces(chain, 2)):
            assert (a - b).ord_pi() >= floor


def test_chain_matches_direct_twisted_base(points_q3):
    # a = 2 with a coefficient outside Z_p: only the q-step chain keeps the
    # level kernels decaying, so this pins the step convention
    from unitroots.gf import gf_cache
    F9 = gf_cache(3, 2)
    tw = make_family(3, 2, [(F9.exp(0), (0,), (1,)), (F9.gen, (1,), (-1,))],
                     "twisted")
    pt = enumerate_closed_points(3, 2, 1, 2)[2][0]
    D = truncation_weight(3, 2, 3, 2)
    direct = fiber_operator(tw, pt, 3, D)
    chain = chain_operator(tw, pt, 3, D)
    for a, b in zip(power_traces(direct, 2), power_traces(chain, 2)):
        assert (a - b).ord_pi() >= 6


def test_chain_unit_root_degree_two(kloosterman, points_q3):
    pt = points_q3[2][0]
    D = truncation_weight(3, 2, 2, 2)
    chain = chain_operator(kloosterman, pt, 2, D)
    vc, cc = unit_root_by_ratios(chain)
    direct = fiber_operator(kloosterman, pt, 2, D)
    vd, cd = unit_root_by_ratios(direct)
    assert cc.monotone() and cd.monotone()
    assert (vc - vd).ord_pi() >= 4
