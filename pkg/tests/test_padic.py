import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from unitroots.padic import (
    CyclotomicInt,
    EisensteinElement,
    FieldContext,
    KappaExponent,
    UnramifiedElement,
    canonical_irreducible,
    embed_pi_rational,
    frobenius_sigma,
    make_field_context,
    teichmuller,
    theta_coeffs,
    unit_pow_kappa,
    zeta_p_embed,
)


def ctx3(prec=4):
    return make_field_context(3, 1, prec)


def ctx9(prec=4):
    return make_field_context(3, 2, prec)


# -- canonical modulus -------------------------------------------------------

def test_canonical_irreducible_f9_is_t2_plus_1():
    assert canonical_irreducible(3, 2) == (1, 0, 1)


def test_canonical_irreducible_degree_one_is_t():
    assert canonical_irreducible(3, 1) == (0, 1)
    assert canonical_irreducible(5, 1) == (0, 1)


def test_canonical_irreducible_really_irreducible():
    # no roots in F_p for the quadratics picked
    for p in (3, 5, 7):
        c0, c1, _ = canonical_irreducible(p, 2)
        assert all((x * x + c1 * x + c0) % p != 0 for x in range(p))


# -- Teichmueller ------------------------------------------------------------

def test_teichmuller_oracle_mod_25():
    # iterate y -> y^5 from 2: fixed point 7 mod 25
    y = 2
    for _ in range(3):
        y = pow(y, 5, 25)
    assert y == 7
    ctx = make_field_context(5, 1, 2)
    assert teichmuller(ctx, 2).coords == (7,)


def test_teichmuller_fixed_by_qth_power():
    ctx = ctx9()
    for xb in [(1, 0), (0, 1), (2, 1), (1, 2)]:
        t = teichmuller(ctx, xb)
        assert (t ** ctx.q).eq_mod(t, ctx.prec)
        # reduces to the input residue
        assert all((u - v) % 3 == 0 for u, v in zip(t.coords, xb))


def test_teichmuller_multiplicative():
    ctx = ctx9()
    gf_mul = lambda x, y: tuple(c % 3 for c in ctx.zq_mul(x, y))
    x, y = (2, 1), (1, 1)
    lhs = teichmuller(ctx, gf_mul(x, y))
    rhs = teichmuller(ctx, x) * teichmuller(ctx, y)
    assert lhs.eq_mod(rhs, ctx.prec)


# -- Frobenius ---------------------------------------------------------------

def test_frobenius_order_and_residue():
    ctx = ctx9()
    x = UnramifiedElement(ctx, (5, 7))
    s = frobenius_sigma(x)
    assert s.sigma().eq_mod(x, ctx.prec)  # sigma^a = id
    xp = UnramifiedElement(ctx, ctx.zq_pow(x.coords, 3))
    assert s.eq_mod(xp, 1)  # sigma(x) = x^p mod p


def test_frobenius_commutes_with_teichmuller():
    ctx = ctx9()
    xb = (2, 1)
    lhs = teichmuller(ctx, xb).sigma()
    rhs = teichmuller(ctx, tuple(c % 3 for c in ctx.zq_pow(xb, 3)))
    assert lhs.eq_mod(rhs, ctx.prec)


# -- Eisenstein ring ---------------------------------------------------------

def test_pi_relation():
    ctx = ctx3()
    pi = EisensteinElement.pi(ctx)
    assert (pi * pi).eq_mod_pi(EisensteinElement.from_int(ctx, -3), 8)
    assert EisensteinElement.from_int(ctx, 3).ord_pi() == 2
    assert pi.ord_pi() == 1


def test_precision_min_rule():
    ctx = ctx3()
    x = EisensteinElement.from_int(ctx, 5, prec_pi=6)
    y = EisensteinElement.from_int(ctx, 7, prec_pi=3)
    assert (x * y).prec_pi == 3
    assert (x + y).prec_pi == 3


def test_unit_inverse():
    ctx = ctx9(5)
    u = EisensteinElement.from_zq(ctx, (2, 1)) + EisensteinElement.pi(ctx)
    v = u.inv()
    assert (u * v).eq_mod_pi(EisensteinElement.one(ctx), u.prec_pi)


def test_division_by_nonunit_rejected():
    ctx = ctx3()
    with pytest.raises(ZeroDivisionError):
        EisensteinElement.pi(ctx).inv()


def test_serialization_roundtrip():
    ctx = ctx9()
    x = EisensteinElement.from_zq(ctx, (2, 1)) + EisensteinElement.pi(ctx).mul_int(5)
    obj = x.to_json()
    assert obj["p"] == 3 and obj["a"] == 2
    y = EisensteinElement.from_json(ctx, obj)
    assert x.eq_mod_pi(y, x.prec_pi)


small_eis = st.tuples(st.integers(0, 80), st.integers(0, 80))


@settings(max_examples=40, deadline=None)
@given(small_eis, small_eis, small_eis)
def test_ring_axioms(ta, tb, tc):
    ctx = ctx3()
    mk = lambda t: EisensteinElement.from_int(ctx, t[0]) + \
        EisensteinElement.pi(ctx).mul_int(t[1])
    a, b, c = mk(ta), mk(tb), mk(tc)
    assert ((a * b) * c).eq_mod_pi(a * (b * c), 8)
    assert (a * (b + c)).eq_mod_pi(a * b + a * c, 8)
    assert (a * b).eq_mod_pi(b * a, 8)


# -- theta coefficients ------------------------------------------------------

def test_theta_low_coefficients():
    ctx = ctx3()
    th = theta_coeffs(ctx, 4)
    assert th[0].eq_mod_pi(EisensteinElement.one(ctx), 8)
    assert th[1].eq_mod_pi(EisensteinElement.pi(ctx), 8)
    # theta_2 = pi^2/2, theta_3 = pi^3/6 - pi = -3pi/2
    assert th[2].eq_mod_pi(embed_pi_rational(ctx, [(2, Fraction(1, 2))]), 8)
    assert th[3].eq_mod_pi(
        embed_pi_rational(ctx, [(3, Fraction(1, 6)), (1, -1)]), 8)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_theta_valuation_bound(p):
    ctx = make_field_context(p, 1, 6)
    th = theta_coeffs(ctx, 20)
    for i, t in enumerate(th):
        assert t.ord_pi() >= math.ceil((p - 1) ** 2 * i / p ** 2)


def test_twisted_theta_matches_plain_at_one():
    ctx = ctx3()
    one = EisensteinElement.one(ctx)
    assert all(u.eq_mod_pi(v, 8) for u, v in
               zip(theta_coeffs(ctx, 6), theta_coeffs(ctx, 6, one)))


# -- zeta_p embedding --------------------------------------------------------

def test_zeta_embed_is_primitive_root():
    ctx = ctx3(5)
    z = zeta_p_embed(ctx)
    one = EisensteinElement.one(ctx)
    assert (z ** 3).eq_mod_pi(one, z.prec_pi)
    assert not z.eq_mod_pi(one, 2)
    assert (z - one - EisensteinElement.pi(ctx)).ord_pi() >= 2


def test_zeta_embed_p2():
    ctx = make_field_context(2, 1, 5)
    z = zeta_p_embed(ctx)
    assert z.eq_mod_pi(EisensteinElement.from_int(ctx, -1), z.prec_pi)


def test_zeta_embed_kills_vanishing_sum():
    # 1 + zeta + zeta^2 = 0
    ctx = ctx3(5)
    v = zeta_p_embed(ctx, CyclotomicInt.from_exponent_counts(3, [1, 1, 1]).coords)
    # from_exponent_counts already reduces; embed the raw sum instead
    z = zeta_p_embed(ctx)
    s = EisensteinElement.one(ctx) + z + z * z
    assert s.is_zero_mod(s.prec_pi)
    assert v.is_zero_mod(v.prec_pi)


# -- cyclotomic integers -----------------------------------------------------

def test_cyclotomic_reduction():
    assert CyclotomicInt.from_exponent_counts(3, [0, 1, 1]).coords == (-1, 0)


def test_cyclotomic_mul_and_inv():
    a = CyclotomicInt(3, [2, 5])
    assert (a * a.inv()) == CyclotomicInt.one(3)
    z = CyclotomicInt(5, [0, 1])
    # zeta^5 = 1
    assert (z * z * z * z * z) == CyclotomicInt.one(5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4),
       st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_cyclotomic_embed_is_ring_hom(ca, cb):
    ctx = make_field_context(5, 1, 3)
    a, b = CyclotomicInt(5, ca), CyclotomicInt(5, cb)
    ea = zeta_p_embed(ctx, a.coords)
    eb = zeta_p_embed(ctx, b.coords)
    eab = zeta_p_embed(ctx, (a * b).coords)
    assert (ea * eb).eq_mod_pi(eab, ea.prec_pi)


# -- kappa powers ------------------------------------------------------------

def test_unit_pow_plain_integer():
    ctx = ctx3()
    u = EisensteinElement.from_int(ctx, 7)
    r = unit_pow_kappa(u, KappaExponent.from_int(3, 4))
    assert r.eq_mod_pi(EisensteinElement.from_int(ctx, pow(7, 4, 81)), 8)


def test_unit_pow_digit_string():
    ctx = ctx3()
    u = EisensteinElement.from_int(ctx, 7)
    r = unit_pow_kappa(u, KappaExponent.from_digits(3, (1, 1, 1)))
    assert r.eq_mod_pi(EisensteinElement.from_int(ctx, pow(7, 13, 81)), r.prec_pi)
    assert r.prec_pi >= 4  # certified at least mod p^2


def test_unit_pow_needs_one_unit():
    ctx = ctx3()
    with pytest.raises(ValueError):
        unit_pow_kappa(EisensteinElement.from_int(ctx, 2),
                       KappaExponent.from_int(3, 2))


def test_unit_pow_homomorphic_in_kappa():
    ctx = ctx3()
    u = EisensteinElement.from_int(ctx, 4)
    k1 = unit_pow_kappa(u, KappaExponent.from_int(3, 5))
    k2 = unit_pow_kappa(u, KappaExponent.from_int(3, 8))
    k3 = unit_pow_kappa(u, KappaExponent.from_int(3, 13))
    assert (k1 * k2).eq_mod_pi(k3, 8)
