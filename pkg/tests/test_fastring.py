"""Batched flat-ring sweeps against the scalar fiber route."""

import random

import numpy as np
import pytest

from unitroots.counting import enumerate_closed_points, make_family
from unitroots.fastring import FlatRing, sweep_unit_roots
from unitroots.fiber import fiber_unit_root_padic
from unitroots.gf import gf_cache
from unitroots.padic import EisensteinElement, make_field_context


@pytest.fixture(scope="module")
def kloosterman():
    return make_family(3, 1, [(1, (0,), (1,)), (1, (1,), (-1,))],
                       "kloosterman")


@pytest.fixture(scope="module")
def three_term():
    return make_family(3, 1, [(1, (1,), (1,)), (1, (1,), (-1,)),
                              (1, (-1,), (0,))], "three-term")


@pytest.fixture(scope="module")
def twisted():
    F9 = gf_cache(3, 2)
    return make_family(3, 2, [(F9.exp(0), (0,), (1,)),
                              (F9.gen, (1,), (-1,))], "twisted")


# -- flat ring arithmetic -----------------------------------------------------


def test_flat_mul_matches_scalar():
    ctx = make_field_context(3, 2, 3)
    ring = FlatRing(ctx)
    rng = random.Random(7)
    for _ in range(25):
        a = EisensteinElement(ctx, [[rng.randrange(27) for _ in range(2)]
                                    for _ in range(2)])
        b = EisensteinElement(ctx, [[rng.randrange(27) for _ in range(2)]
                                    for _ in range(2)])
        prod = ring.to_eis(ring.mul(ring.from_eis(a)[None],
                                    ring.from_eis(b)[None])[0])
        assert (prod - a * b).ord_pi() >= 6


def test_flat_sigma_matches_scalar():
    ctx = make_field_context(3, 2, 3)
    ring = FlatRing(ctx)
    rng = random.Random(11)
    for _ in range(10):
        a = EisensteinElement(ctx, [[rng.randrange(27) for _ in range(2)]
                                    for _ in range(2)])
        img = ring.to_eis(ring.apply_sigma(ring.from_eis(a)[None])[0])
        assert (img - a.sigma()).ord_pi() >= 6


def test_flat_inv_and_teichmuller():
    ctx = make_field_context(3, 2, 3)
    ring = FlatRing(ctx)
    K = gf_cache(3, 2)
    res = np.array([K.exp(j) for j in range(8)], dtype=np.int64)
    y = ring.teichmuller(K, res)
    # y^(q-1) = 1 and residues survive
    acc = y
    for _ in range(7):
        acc = ring.mul(acc, y)
    one = ring.one((8,))
    assert np.array_equal(acc, one)
    z = ring.inv(y, K)
    assert np.array_equal(ring.mul(y, z), one)


def test_flat_ord_pi():
    ctx = make_field_context(3, 1, 3)
    ring = FlatRing(ctx)
    from unitroots.padic import EisensteinElement as E
    els = [E.from_int(ctx, 3), E.pi(ctx), E.from_int(ctx, 9),
           E.from_int(ctx, 1), E.zero(ctx)]
    arr = np.stack([ring.from_eis(e) for e in els])
    assert list(ring.ord_pi(arr)) == [2, 1, 4, 0, 6]


# -- sweeps against the scalar route -----------------------------------------


def test_sweep_matches_scalar_small_degrees(kloosterman, three_term):
    for fam in (kloosterman, three_term):
        for d in (1, 2):
            res = sweep_unit_roots(fam, 3, d)
            assert res.certified(6)
            for pt, val in zip(res.points, res.values):
                sval, _, _ = fiber_unit_root_padic(fam, pt, 3)
                assert (val - sval).ord_pi() >= 6


def test_sweep_twisted_matches_scalar_degree_one(twisted):
    res = sweep_unit_roots(twisted, 3, 1)
    assert res.certified(6)
    for pt, val in zip(res.points, res.values):
        sval, _, _ = fiber_unit_root_padic(twisted, pt, 3)
        assert (val - sval).ord_pi() >= 6


def test_sweep_larger_degrees_are_one_units(kloosterman):
    for d in (3, 4, 5):
        res = sweep_unit_roots(kloosterman, 3, d)
        assert res.certified(6)
        for val in res.values:
            assert (val - EisensteinElement.one(val.ctx)).ord_pi() >= 2


def test_sweep_stable_under_basis_doubling(kloosterman):
    res1 = sweep_unit_roots(kloosterman, 3, 3)
    res2 = sweep_unit_roots(kloosterman, 3, 3, D=18)
    for v1, v2 in zip(res1.values, res2.values):
        assert (v1 - v2).ord_pi() >= 6


def test_sweep_constant_character(three_term):
    res = sweep_unit_roots(three_term, 3, 1)
    assert list(res.char_exponents) == [1, 2]


def test_sweep_rejects_two_variable_fiber():
    fam = make_family(3, 1, [(1, (0,), (1, 0)), (1, (0,), (0, 1)),
                             (1, (1,), (-1, -1))], "surface")
    with pytest.raises(ValueError):
        sweep_unit_roots(fam, 2, 1)
