"""Exact character-sum side: families, closed points, L-series over Q(zeta_p).

Everything here is finite-field arithmetic and exact cyclotomic integers; no
p-adic approximation enters.  These routines are the independent referee for
the p-adic operator computations: sums are literal histograms over tori, the
L-series is the exponential of the sum generating series, and rational
reconstruction is Pade elimination verified on spare coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gf import gf_cache
from .padic import (CyclotomicInt, EisensteinElement, make_field_context,
                    zeta_p_embed)

# largest torus a single histogram is allowed to materialize
_TORUS_CAP = 1 << 24


class NeedMoreTerms(Exception):
    """Rational reconstruction could not be verified; carries `needed` terms."""

    def __init__(self, needed: int):
        super().__init__(f"need at least {needed} series coefficients")
        self.needed = needed


@dataclass(frozen=True)
class LaurentFamily:
    """f(L, X) = sum of c_w * L^{r_w} * X^{u_w} over F_{p^a}.

    Each term is (coeff coords over F_{p^a}, parameter exponents r, fiber
    exponents u); exponents may be negative.  `s` parameters, `n` fiber
    variables.
    """

    p: int
    a: int
    s: int
    n: int
    terms: tuple
    name: str = ""

    def __post_init__(self):
        for c, r, u in self.terms:
            if len(c) != self.a or len(r) != self.s or len(u) != self.n:
                raise ValueError("term shape does not match family dimensions")
            if all(ci % self.p == 0 for ci in c):
                raise ValueError("zero coefficient in family support")

    @property
    def q(self) -> int:
        return self.p ** self.a

    @property
    def omega1(self) -> int:
        return max(sum(abs(ri) for ri in r) for _, r, _ in self.terms)

    @property
    def omega2(self) -> int:
        return max(sum(abs(ui) for ui in u) for _, _, u in self.terms)

    def param_supports(self):
        return tuple(r for _, r, _ in self.terms)

    def fiber_supports(self):
        return tuple(u for _, _, u in self.terms)


def make_family(p: int, a: int, terms, name: str = "") -> LaurentFamily:
    """Terms as (coeff, r, u); integer coefficients mean constants of F_{p^a}."""
    norm = []
    s = len(terms[0][1])
    n = len(terms[0][2])
    for c, r, u in terms:
        if isinstance(c, int):
            c = (c % p,) + (0,) * (a - 1)
        norm.append((tuple(c), tuple(r), tuple(u)))
    return LaurentFamily(p, a, s, n, tuple(norm), name)


@dataclass(frozen=True)
class ClosedPoint:
    """Degree-d closed point of the parameter torus, orbit representative.

    Coordinates live in GF(p, a*d); `logs` are their discrete logs there.  The
    representative is the orbit element whose log vector is lexicographically
    smallest.
    """

    p: int
    a: int
    degree: int
    logs: tuple
    coords: tuple


def enumerate_closed_points(p: int, a: int, s: int, d_max: int):
    """Closed points of (G_m)^s over F_{p^a} of degree <= d_max, by degree."""
    out = {}
    for d in range(1, d_max + 1):
        K = gf_cache(p, a * d)
        Q1 = K.q - 1
        q = p ** a
        if (Q1 + 1) ** s > _TORUS_CAP:
            raise ValueError(f"degree-{d} torus too large to enumerate")
        idx = np.arange(Q1 ** s, dtype=np.int64)
        comps = []
        rest = idx
        for _ in range(s):
            comps.append(rest % Q1)
            rest = rest // Q1
        comps = comps[::-1]  # first coordinate most significant: numeric = lex

        def encode(cs):
            e = np.zeros_like(idx)
            for c in cs:
                e = e * Q1 + c
            return e

        cur = [c.copy() for c in comps]
        lexmin = encode(cur)
        exact = np.ones(Q1 ** s, dtype=bool)
        for _ in range(1, d):
            cur = [(c * q) % Q1 for c in cur]
            np.minimum(lexmin, encode(cur), out=lexmin)
        # exact degree: no proper divisor e of d fixes the whole tuple
        for e in _proper_divisors(d):
            fe = q ** e - 1
            fixed = np.ones(Q1 ** s, dtype=bool)
            for c in comps:
                fixed &= (c * fe) % Q1 == 0
            exact &= ~fixed
        reps = np.nonzero((lexmin == encode(comps)) & exact)[0]
        pts = []
        for ridx in reps:
            logs = []
            rest = int(ridx)
            for _ in range(s):
                logs.append(rest % Q1)
                rest //= Q1
            logs = tuple(reversed(logs))
            coords = tuple(K.exp(j) for j in logs)
            pts.append(ClosedPoint(p, a, d, logs, coords))
        out[d] = pts
    return out


def _proper_divisors(d: int):
    return [e for e in range(1, d) if d % e == 0]


def count_points(p: int, a: int, s: int, d_max: int):
    pts = enumerate_closed_points(p, a, s, d_max)
    return {d: len(v) for d, v in pts.items()}


# -- exponential sums --------------------------------------------------------


def _term_logs(fam: LaurentFamily, point: ClosedPoint, K):
    """Discrete log in K of each term coefficient c_w * prod lam_i^{r_i}."""
    Q1 = K.q - 1
    lam_logs = []
    for coords in point.coords:
        img = K.embed_from(fam.a * point.degree, coords)
        lam_logs.append(K.log(img))
    logs = []
    for c, r, u in fam.terms:
        ell = K.log(K.embed_from(fam.a, c))
        for ri, lj in zip(r, lam_logs):
            ell = (ell + ri * lj) % Q1
        logs.append((ell, u))
    return logs


def exp_sum(fam: LaurentFamily, point: ClosedPoint, m: int) -> CyclotomicInt:
    """S_m at the fiber over `point`: sum over (F_{q^{m d}}^*)^n of zeta^Tr f."""
    K = gf_cache(fam.p, fam.a * point.degree * m)
    return _histogram_sum(fam.p, fam.n, K, _term_logs(fam, point, K))


def family_total_sum(fam: LaurentFamily, m: int) -> CyclotomicInt:
    """Sum of zeta^Tr f over the whole (s+n)-dimensional torus of F_{q^m}.

    Equals the sum of fiber sums S over all rational points lam of (G_m)^s,
    which makes it a cheap cross-check of `exp_sum`.
    """
    K = gf_cache(fam.p, fam.a * m)
    Q1 = K.q - 1
    logs = []
    for c, r, u in fam.terms:
        ell = K.log(K.embed_from(fam.a, c))
        logs.append((ell, tuple(r) + tuple(u)))
    return _histogram_sum(fam.p, fam.s + fam.n, K, logs)


def _histogram_sum(p: int, n: int, K, term_logs) -> CyclotomicInt:
    Q1 = K.q - 1
    size = Q1 ** n
    if size > _TORUS_CAP:
        raise ValueError("torus too large for exact summation")
    tr = K.tr_pow.astype(np.int64)
    vals = np.zeros(size, dtype=np.int64)
    shape = (Q1,) * n
    axes_idx = np.arange(Q1, dtype=np.int64)
    for ell, u in term_logs:
        idx = np.full(shape, ell, dtype=np.int64)
        for i, ui in enumerate(u):
            if ui:
                bc = [1] * n
                bc[i] = Q1
                idx = idx + (axes_idx * ui).reshape(bc)
        vals += tr[(idx % Q1).reshape(-1)]
    counts = np.bincount(vals % p, minlength=p)
    return CyclotomicInt.from_exponent_counts(p, [int(c) for c in counts])


# -- L-series over Q(zeta_p) -------------------------------------------------


def l_series_from_sums(p: int, sums, M: int):
    """Coefficients c_0..c_M of exp(sum_m S_m T^m / m), exact over Q(zeta_p)."""
    if len(sums) < M:
        raise ValueError("not enough sums for requested truncation")
    cs = [CyclotomicInt.one(p)]
    for k in range(M):
        acc = sums[0] * cs[k]
        for m in range(2, k + 2):
            acc = acc + sums[m - 1] * cs[k + 1 - m]
        cs.append(acc * Fraction(1, k + 1))
    return cs


def fiber_l_series(fam: LaurentFamily, point: ClosedPoint, M: int):
    sums = [exp_sum(fam, point, m) for m in range(1, M + 1)]
    return l_series_from_sums(fam.p, sums, M), sums


# -- rational reconstruction -------------------------------------------------


def _solve_square(p, rows, rhs):
    """Exact Gaussian elimination over Q(zeta_p); None if singular."""
    d = len(rhs)
    A = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    zero = CyclotomicInt.zero(p)
    for col in range(d):
        piv = None
        for r in range(col, d):
            if A[r][col] != zero:
                piv = r
                break
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = A[col][col].inv()
        A[col] = [x * inv for x in A[col]]
        for r in range(d):
            if r != col and A[r][col] != zero:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][d] for i in range(d)]


def rational_reconstruct(p: int, coeffs, max_total: int | None = None):
    """Minimal (num, den) with den*series = num mod T^{len}, den(0) = 1.

    Requires at least two coefficients beyond those that determine the
    candidate; raises NeedMoreTerms otherwise.  Returns (num, den) as tuples
    of CyclotomicInt.
    """
    M = len(coeffs) - 1  # highest available index
    zero = CyclotomicInt.zero(p)
    one = CyclotomicInt.one(p)
    limit = max_total if max_total is not None else M
    for total in range(limit + 1):
        for dd in range(total + 1):
            ee = total - dd
            if ee + dd + 2 > M:
                raise NeedMoreTerms(ee + dd + 3)
            if dd == 0:
                qs = [one]
            else:
                rows = []
                rhs = []
                for k in range(ee + 1, ee + dd + 1):
                    rows.append([coeffs[k - i] if k - i >= 0 else zero
                                 for i in range(1, dd + 1)])
                    rhs.append(zero - coeffs[k])
                sol = _solve_square(p, rows, rhs)
                if sol is None:
                    continue
                qs = [one] + sol
            ok = True
            for k in range(ee + 1, M + 1):
                acc = zero
                for i in range(min(k, dd) + 1):
                    acc = acc + qs[i] * coeffs[k - i]
                if acc != zero:
                    ok = False
                    break
            if ok:
                num = []
                for j in range(ee + 1):
                    acc = zero
                    for i in range(min(j, dd) + 1):
                        acc = acc + qs[i] * coeffs[j - i]
                    num.append(acc)
                while len(num) > 1 and num[-1] == zero:
                    num.pop()
                return tuple(num), tuple(qs)
    raise NeedMoreTerms(M + 3)


@dataclass(frozen=True)
class RationalL:
    """L-series as a verified rational function over Q(zeta_p)."""

    p: int
    num: tuple
    den: tuple
    sums: tuple

    def is_integral(self) -> bool:
        return all(c.is_integral() for c in self.num + self.den)


def fiber_rational_l(fam: LaurentFamily, point: ClosedPoint,
                     field_cap: int = 2 * 10 ** 6) -> RationalL:
    """Grow the sum list until the L-series pins down as a rational function."""
    M = 4
    while True:
        if fam.p ** (fam.a * point.degree * M) > field_cap:
            raise ValueError("required sum field exceeds the exact-route cap")
        cs, sums = fiber_l_series(fam, point, M)
        try:
            num, den = rational_reconstruct(fam.p, cs)
        except NeedMoreTerms as exc:
            M = max(M + 2, exc.needed - 1)
            continue
        return RationalL(fam.p, num, den, tuple(sums))


# -- exact unit root of a fiber L --------------------------------------------


@dataclass(frozen=True)
class ExactUnitRoot:
    """Unit reciprocal root of L^{(-1)^{n+1}} at a fiber, exactly computed."""

    value: EisensteinElement
    location: str  # which side of the signed L carries it
    l: RationalL
    point: ClosedPoint


def _unit_coeff_count(emb) -> int:
    """Length of the slope-zero segment: largest i with c_i a p-adic unit."""
    count = 0
    for i in range(1, len(emb)):
        if emb[i].ord_pi() == 0:
            count = i
    return count


def fiber_unit_root_exact(fam: LaurentFamily, point: ClosedPoint, prec: int,
                          field_cap: int = 2 * 10 ** 6) -> ExactUnitRoot:
    """Hensel-extract the unique unit reciprocal root from the exact L.

    The signed L-function L^{(-1)^{n+1}} must have exactly one unit reciprocal
    root between numerator and denominator; anything else raises.
    """
    L = fiber_rational_l(fam, point, field_cap)
    if not L.is_integral():
        raise ArithmeticError("L-series coefficients are not algebraic integers")
    ctx = make_field_context(fam.p, fam.a * point.degree, prec)
    signed_num, signed_den = ((L.num, L.den) if fam.n % 2 == 1
                              else (L.den, L.num))
    emb_num = [zeta_p_embed(ctx, c.coords) for c in signed_num]
    emb_den = [zeta_p_embed(ctx, c.coords) for c in signed_den]
    counts = (_unit_coeff_count(emb_num), _unit_coeff_count(emb_den))
    if counts == (1, 0):
        target, location = emb_num, "numerator"
    elif counts == (0, 1):
        target, location = emb_den, "denominator"
    else:
        raise ArithmeticError(f"unit reciprocal root count {counts}, need one")
    value = _hensel_reciprocal_root(fam.p, fam.a * point.degree, ctx, target)
    return ExactUnitRoot(value, location, L, point)


def _hensel_reciprocal_root(p: int, k: int, ctx, coeffs) -> EisensteinElement:
    """Unique nonzero root of P*(z) = sum c_i z^{D-i} for a slope-(0,1) poly."""
    D = len(coeffs) - 1
    K = gf_cache(p, k)
    rbar = [tuple(ci % p for ci in c.comps[0]) for c in coeffs]
    zero = (0,) * k
    roots = []
    for j in range(K.q - 1):
        x = K.exp(j)
        acc = zero
        for i in range(D + 1):
            acc = K.add(K.mul(acc, x), rbar[i])
        if acc == zero:
            roots.append(x)
    if len(roots) != 1:
        raise ArithmeticError(f"expected one residue root, found {len(roots)}")
    # derivative of the reciprocal polynomial at the root must not vanish
    x = roots[0]
    acc = zero
    for i in range(D):
        dcoef = tuple(c * (D - i) % p for c in rbar[i])
        acc = K.add(K.mul(acc, x), dcoef)
    if acc == zero:
        raise ArithmeticError("residue root is not simple")
    z = EisensteinElement.from_zq(ctx, tuple(int(c) for c in roots[0]))
    goal = (p - 1) * ctx.prec
    for _ in range(goal.bit_length() + 2):
        pz = _horner(coeffs, z, D)
        dz = _horner_deriv(coeffs, z, D)
        z = z - pz * dz.inv()
        if pz.is_zero_mod(goal):
            break
    if not _horner(coeffs, z, D).is_zero_mod(goal):
        raise ArithmeticError("Hensel iteration did not converge")
    return z


def _horner(coeffs, z, D):
    """P*(z) = sum c_i z^{D-i}, plain Horner in coefficient order."""
    acc = coeffs[0]
    for i in range(1, D + 1):
        acc = acc * z + coeffs[i]
    return acc


def _horner_deriv(coeffs, z, D):
    acc = coeffs[0].mul_int(D)
    for i in range(1, D):
        acc = acc * z + coeffs[i].mul_int(D - i)
    return acc
