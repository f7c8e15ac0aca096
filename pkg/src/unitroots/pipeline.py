"""Closed-form route to the unit root and the cross-route comparisons.

The fiber modules compute unit roots point by point and `sympower` gets
them from a truncated operator.  This module adds the third route: the
balanced-exponent generating series of the family, its Frobenius ratio,
and the evaluation of that ratio along the Teichmueller orbit of the
coefficients.  It also assembles the degree-graded Euler product of the
powered fiber roots, extracts its unit root from moment ratios, expands
the normalized splitting series over the lineality strata, and checks
that all routes land on one value.

Series coefficients are kept as exact elements of Q(pi) for as long as
possible; ring elements appear only at evaluation time.  Values from
fibers of different degrees are compared after descending them to the
base ring, which the unramified Galois action makes possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cones import ConeSeries
from .counting import LaurentFamily, enumerate_closed_points
from .fastring import sweep_all
from .fiber import (RatioCertificate, fiber_unit_root_padic, parameter_cone,
                    support_cone)
from .padic import (EisensteinElement, FieldContext, KappaExponent,
                    PiRational, make_field_context, teichmuller,
                    unit_pow_kappa)
from .sympower import SymTrunc, beta_unit_root, dual_beta_matrix


class StabilizationError(ArithmeticError):
    """A truncation schedule ran out before the target precision held."""


def _as_kappa(p: int, kappa) -> KappaExponent:
    if isinstance(kappa, KappaExponent):
        if kappa.p != p:
            raise ValueError("exponent was built for a different prime")
        return kappa
    return KappaExponent.from_int(p, kappa)


@dataclass
class UnitRootResult:
    """A computed unit root with its provenance.

    `certified_prec` counts pi digits; `route` is one of point-count,
    operator, formula, eigenvector.  Every route produces a 1-unit.
    """

    value: EisensteinElement
    certified_prec: int
    route: str
    evidence: dict


# -- exact series in one variable per family term ----------------------------


@dataclass
class YSeries:
    """Truncated power series with one variable per family term.

    Coefficients are exact elements of Q(pi) keyed by exponent tuples;
    `degree` bounds the total degree.  `tail` records whether exponent
    vectors beyond every bound can exist at all, i.e. whether truncation
    is an approximation or the series is already complete.
    """

    p: int
    nvars: int
    coeffs: dict
    degree: int
    tail: bool = True

    @staticmethod
    def one(p: int, nvars: int, degree: int, tail: bool = False) -> "YSeries":
        zero = (0,) * nvars
        return YSeries(p, nvars, {zero: PiRational.one(p)}, degree, tail)

    def coeff(self, expo) -> PiRational:
        got = self.coeffs.get(tuple(expo))
        return PiRational.zero(self.p) if got is None else got

    def is_one(self) -> bool:
        zero = (0,) * self.nvars
        return set(self.coeffs) == {zero} and \
            self.coeffs[zero] == PiRational.one(self.p)

    def is_p_integral(self) -> bool:
        return all(c.is_p_integral() for c in self.coeffs.values())

    def _merge(self, other, sign: int) -> "YSeries":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            got = out.get(e)
            c = c * sign if sign != 1 else c
            out[e] = c if got is None else got + c
        out = {e: c for e, c in out.items() if c != PiRational.zero(self.p)}
        return YSeries(self.p, self.nvars,
                       out, min(self.degree, other.degree),
                       self.tail or other.tail)

    def __add__(self, other):
        return self._merge(other, 1)

    def __sub__(self, other):
        return self._merge(other, -1)

    def mul(self, other: "YSeries", degree: int | None = None) -> "YSeries":
        cap = min(self.degree, other.degree) if degree is None else degree
        out = {}
        for e1, c1 in self.coeffs.items():
            w1 = sum(e1)
            for e2, c2 in other.coeffs.items():
                if w1 + sum(e2) > cap:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                got = out.get(e)
                out[e] = c if got is None else got + c
        zero = PiRational.zero(self.p)
        return YSeries(self.p, self.nvars,
                       {e: c for e, c in out.items() if c != zero},
                       cap, self.tail or other.tail)

    def inv(self, degree: int | None = None) -> "YSeries":
        """Reciprocal series; requires constant coefficient exactly 1."""
        cap = self.degree if degree is None else degree
        zero = (0,) * self.nvars
        if self.coeff(zero) != PiRational.one(self.p):
            raise ValueError("inverse needs constant coefficient 1")
        w = YSeries(self.p, self.nvars,
                    {e: -c for e, c in self.coeffs.items() if e != zero},
                    cap, self.tail)
        if not w.coeffs:
            return YSeries.one(self.p, self.nvars, cap, self.tail)
        mindeg = min(sum(e) for e in w.coeffs)
        acc = YSeries.one(self.p, self.nvars, cap, self.tail)
        pw = YSeries.one(self.p, self.nvars, cap, self.tail)
        for _ in range(cap // mindeg):
            pw = pw.mul(w, cap)
            if not pw.coeffs:
                break
            acc = acc + pw
        return acc

    def subs_power(self, k: int) -> "YSeries":
        """Substitute each variable by its k-th power, same degree cap."""
        out = {}
        for e, c in self.coeffs.items():
            if k * sum(e) <= self.degree:
                out[tuple(k * x for x in e)] = c
        return YSeries(self.p, self.nvars, out, self.degree, self.tail)

    def eval_at(self, ctx: FieldContext, point,
                degree: int | None = None) -> EisensteinElement:
        """Evaluate at a tuple of Z_q units, summing degrees <= cap."""
        cap = self.degree if degree is None else degree
        acc = EisensteinElement.zero(ctx)
        for e, c in sorted(self.coeffs.items()):
            if sum(e) > cap:
                continue
            term = c.to_eis(ctx)
            mono = None
            for x, k in zip(point, e):
                if k:
                    y = x ** k
                    mono = y if mono is None else mono * y
            if mono is not None:
                term = term * EisensteinElement.from_zq(ctx, mono.coords)
            acc = acc + term
        return acc


def _balance_rank(fam: LaurentFamily) -> int:
    """Rank of the exponent matrix whose columns are the (r, u) vectors."""
    cols = [tuple(r) + tuple(u) for _, r, u in fam.terms]
    rows = [[Fraction(c[i]) for c in cols] for i in range(fam.s + fam.n)]
    rank, col = 0, 0
    while rank < len(rows) and col < len(cols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def _balance_buckets(fam: LaurentFamily, degree: int, window) -> dict:
    """Exponent vectors of total degree <= degree, grouped by the balance
    sum_b e_b (r_b, u_b); only balances in `window` are kept.

    The coefficient attached to e is pi^|e| / prod e_b!, the term the
    exponential product assigns to that stratum.
    """
    vecs = [tuple(r) + tuple(u) for _, r, u in fam.terms]
    dims = fam.s + fam.n
    nb = len(vecs)
    # largest |coordinate| still reachable from term index i onward, and
    # the largest |coordinate| any wanted balance has
    reach = [[0] * dims for _ in range(nb + 1)]
    for i in range(nb - 1, -1, -1):
        for j in range(dims):
            reach[i][j] = max(reach[i + 1][j], abs(vecs[i][j]))
    wmax = [max(abs(key[j]) for key in window) for j in range(dims)]
    buckets = {}
    expo = [0] * nb

    def descend(i, budget, bal):
        if i == nb:
            key = tuple(bal)
            if key in window:
                tot = degree - budget
                den = 1
                for x in expo:
                    den *= math.factorial(x)
                c = PiRational.from_pi_power(fam.p, tot, Fraction(1, den))
                buckets.setdefault(key, {})[tuple(expo)] = c
            return
        for j in range(dims):
            if abs(bal[j]) - wmax[j] > budget * reach[i][j]:
                return
        v = vecs[i]
        for k in range(budget + 1):
            expo[i] = k
            descend(i + 1, budget - k,
                    [b + k * x for b, x in zip(bal, v)])
        expo[i] = 0

    descend(0, degree, [0] * dims)
    return buckets


def g00_series(fam: LaurentFamily, degree: int) -> YSeries:
    """Balanced-exponent series: the exponential product's coefficient of
    the trivial monomial in every parameter and fiber variable.

    Contributions come from exponent vectors in the kernel of the balance
    matrix; full column rank means the constant term 1 is the whole
    series, and the tail flag is cleared.
    """
    p = fam.p
    zero = (0,) * (fam.s + fam.n)
    buckets = _balance_buckets(fam, degree, {zero})
    coeffs = buckets.get(zero, {})
    full_rank = _balance_rank(fam) == len(fam.terms)
    out = YSeries(p, len(fam.terms), coeffs, degree, not full_rank)
    if out.coeff((0,) * out.nvars) != PiRational.one(p):
        raise ArithmeticError("balanced series lost its constant term")
    if not out.is_p_integral():
        raise ArithmeticError("integrality violation in the balanced series")
    if full_rank and len(coeffs) != 1:
        raise ArithmeticError("full-rank balance matrix admitted a relation")
    return out


def G_ratio(g00: YSeries, degree: int | None = None) -> YSeries:
    """Frobenius quotient g(Y) / g(Y^p), truncated by total degree.

    The quotient's coefficients must all be p-integral; a violation is a
    hard error, not a tolerance, since analytic continuation puts the
    ratio inside the closed unit polydisk.
    """
    cap = g00.degree if degree is None else degree
    den = g00.subs_power(g00.p)
    out = g00.mul(den.inv(cap), cap)
    for e, c in out.coeffs.items():
        if not c.is_p_integral():
            raise ArithmeticError(
                "integrality violation in the Frobenius ratio at %r" % (e,))
    return out


# -- evaluation along the Teichmueller orbit ---------------------------------

# consecutive truncation steps that must agree before a value is certified
_SETTLE_CONFIRM = 3


def _settle(evals, target, what):
    """Certify a truncation trail.

    evals is [(degree, value), ...] along the full degree schedule.  The
    differences between consecutive evaluations must reach the target
    order and stay there: at least _SETTLE_CONFIRM agreeing steps after
    the last disagreement.  Agreement followed by a late jump is exactly
    what this rejects.  Returns (deepest value, trail).
    """
    trail = []
    for (_, v0), (d1, v1) in zip(evals, evals[1:]):
        trail.append((d1, (v1 - v0).ord_pi()))
    last_bad = -1
    for i, (_, gap) in enumerate(trail):
        if gap < target:
            last_bad = i
    if len(trail) - 1 - last_bad < _SETTLE_CONFIRM:
        raise StabilizationError("%s does not settle below degree %d"
                                 % (what, evals[-1][0]))
    return evals[-1][1], trail


def _teichmuller_orbit(fam: LaurentFamily, ctx: FieldContext):
    """Coefficient lifts and their Frobenius powers, one tuple per step.

    The orbit must close after `a` steps; failure to close means the
    lifts are wrong and is a hard error.
    """
    base = tuple(teichmuller(ctx, c) for c, _, _ in fam.terms)
    orbit = [base]
    for _ in range(fam.a - 1):
        orbit.append(tuple(x ** fam.p for x in orbit[-1]))
    back = tuple(x ** fam.p for x in orbit[-1])
    if any(x != y for x, y in zip(back, base)):
        raise ArithmeticError("coefficient orbit does not close under "
                              "Frobenius")
    return orbit


def formula_eval(fam: LaurentFamily, kappa, N: int = 3,
                 degree: int | None = None) -> UnitRootResult:
    """Unit root by the closed-form route.

    The Frobenius ratio is evaluated at every Frobenius power of the
    lifted coefficients, the full orbit product is stepped through a
    degree schedule until three consecutive evaluations agree to working
    precision, and the requested power is applied to the settled product.
    """
    p = fam.p
    kap = _as_kappa(p, kappa)
    ctx = make_field_context(p, fam.a, N)
    target = (p - 1) * N
    orbit = _teichmuller_orbit(fam, ctx)
    if _balance_rank(fam) == len(fam.terms):
        value = unit_pow_kappa(EisensteinElement.one(ctx), kap)
        return UnitRootResult(value, min(target, value.prec_pi), "formula",
                              {"trivial": True, "orbit": fam.a})
    probe = g00_series(fam, degree if degree is not None else 24)
    rel = [sum(e) for e in probe.coeffs if sum(e) > 0]
    if not rel:
        raise StabilizationError("no balance relation found below the "
                                 "degree cap; raise it")
    step = min(rel)
    cap = degree if degree is not None else 9 * step
    g00 = probe if probe.degree >= cap else g00_series(fam, cap)
    G = G_ratio(g00, cap)
    evals = []
    for d in range(2 * step, cap + 1, step):
        cur = None
        for pt in orbit:
            val = G.eval_at(ctx, pt, degree=d)
            cur = val if cur is None else cur * val
        evals.append((d, cur))
    settled, trail = _settle(evals, target, "orbit product")
    value = unit_pow_kappa(settled, kap)
    if (value - EisensteinElement.one(ctx)).ord_pi() < 1:
        raise ArithmeticError("orbit product is not a 1-unit")
    return UnitRootResult(value, min(target, value.prec_pi), "formula",
                          {"trivial": False, "degree_trail": trail,
                           "degree_used": trail[-1][0], "orbit": fam.a})


# -- Euler product over closed points ----------------------------------------


@dataclass
class LUnitSeries:
    """Euler product of powered fiber unit roots over closed points.

    `coeffs` are the T-series coefficients up to T^d_max in the base
    ring, `moments` the degree-weighted power sums M_1 .. M_d_max of the
    same powered roots, and `floors` the per-degree stabilization floor
    the fiber certificates provide.
    """

    ctx: FieldContext
    kappa: KappaExponent
    d_max: int
    coeffs: list
    moments: list
    floors: dict
    counts: dict
    cert_prec: int


def _galois_descend(x: EisensteinElement, ctx: FieldContext,
                    floor: int) -> EisensteinElement:
    """Map a value from a bigger unramified ring down to the base.

    Fiber unit roots are fixed by the unramified Frobenius, so every
    coordinate beyond the constant one must vanish to the certified
    precision before the constant coordinates can be carried down.
    """
    big = x.ctx
    if big.p != ctx.p or big.prec != ctx.prec:
        raise ValueError("incompatible contexts for descent")
    kept = tuple((co[0],) + (0,) * (big.a - 1) for co in x.comps)
    flat = EisensteinElement(big, kept, x.prec_pi)
    drop = (x - flat).ord_pi()
    if drop < min(floor, x.prec_pi):
        raise ArithmeticError("fiber unit root is not Galois invariant "
                              "over the base ring")
    down = tuple((co[0],) + (0,) * (ctx.a - 1) for co in x.comps)
    return EisensteinElement(ctx, down, x.prec_pi)


def _divisors(m: int):
    return [d for d in range(1, m + 1) if m % d == 0]


def _mul_unit_euler(coeffs, u: EisensteinElement, d: int):
    """Multiply a T-series by (1 - u T^d)^{-1} in place of its length."""
    ctx = u.ctx
    top = (len(coeffs) - 1) // d
    pows = [EisensteinElement.one(ctx)]
    for _ in range(top):
        pows.append(pows[-1] * u)
    out = []
    for j in range(len(coeffs)):
        acc = coeffs[j]
        for k in range(1, j // d + 1):
            acc = acc + coeffs[j - k * d] * pows[k]
        out.append(acc)
    return out


def _assemble(ctx: FieldContext, kap: KappaExponent, d_max: int,
              values: dict, floors: dict, counts: dict) -> LUnitSeries:
    one = EisensteinElement.one(ctx)
    coeffs = [one] + [EisensteinElement.zero(ctx)] * d_max
    cert = min([(ctx.p - 1) * ctx.prec] + list(floors.values()))
    for d in sorted(values):
        for v in values[d]:
            u = unit_pow_kappa(v, kap)
            cert = min(cert, u.prec_pi)
            coeffs = _mul_unit_euler(coeffs, u, d)
    moments = []
    for m in range(1, d_max + 1):
        acc = EisensteinElement.zero(ctx)
        for d in _divisors(m):
            if d not in values:
                continue
            part = EisensteinElement.zero(ctx)
            for v in values[d]:
                w = v ** (m // d)
                u = unit_pow_kappa(w, kap)
                cert = min(cert, u.prec_pi)
                part = part + u
            acc = acc + part.mul_int(d)
        if (acc + one).ord_pi() < 1:
            raise ArithmeticError("moment fails the mod-p residue check")
        moments.append(acc)
    return LUnitSeries(ctx, kap, d_max, coeffs, moments, floors, counts, cert)


def assemble_L_unit(fam: LaurentFamily, kappa, d_max: int,
                    N: int = 3) -> LUnitSeries:
    """Euler product of (1 - rho^kappa T^deg)^{-1} over closed points of
    degree <= d_max, together with its moment sums.

    Integer powers of each fiber root are taken inside and the kappa
    power outside, so truncated-digit exponents stay well defined.  With
    one fiber variable the batched sweep computes whole degrees at once;
    otherwise each point runs through the single-fiber route.
    """
    p = fam.p
    kap = _as_kappa(p, kappa)
    ctx = make_field_context(p, fam.a, N)
    values, floors, counts = {}, {}, {}
    if fam.n == 1:
        sweeps = sweep_all(fam, N, d_max)
        for d, res in sweeps.items():
            floor = min(g[-1] for g in res.gaps)
            if not res.certified(min(floor, (p - 1) * N)):
                raise ArithmeticError("degree-%d sweep is not certified" % d)
            floors[d] = floor
            counts[d] = len(res.points)
            values[d] = [_galois_descend(v, ctx, floor) for v in res.values]
    else:
        points = enumerate_closed_points(p, fam.a, fam.s, d_max)
        for d in range(1, d_max + 1):
            vals, floor = [], (p - 1) * N
            for pt in points[d]:
                v, cert, _ = fiber_unit_root_padic(fam, pt, N)
                floor = min(floor, cert.stable_prec())
                vals.append(_galois_descend(v, ctx, cert.stable_prec()))
            floors[d] = floor
            counts[d] = len(points[d])
            values[d] = vals
    return _assemble(ctx, kap, d_max, values, floors, counts)


def moments_from_series(series: LUnitSeries) -> list:
    """Moments recovered from the T-series alone via the power-sum
    recurrence on its reciprocal, division free.

    Independent of the directly summed moments; agreement of the two is
    the assembly's route-equivalence certificate.
    """
    ctx = series.ctx
    L = series.coeffs
    if L[0] != EisensteinElement.one(ctx):
        raise ValueError("series must start at 1")
    A = [EisensteinElement.one(ctx)]
    for j in range(1, len(L)):
        acc = EisensteinElement.zero(ctx)
        for i in range(1, j + 1):
            acc = acc + L[i] * A[j - i]
        A.append(-acc)
    out = []
    for m in range(1, len(L)):
        acc = A[m].mul_int(m)
        for i in range(1, m):
            acc = acc + out[i - 1] * A[m - i]
        out.append(-acc)
    return out


def extract_unit_root_of_Lunit(series: LUnitSeries) -> UnitRootResult:
    """Unit root of the assembled product from its moment ratios.

    Consecutive moment ratios stabilize on the unique unit root; the gap
    sequence must be monotone and is the certificate.  The sign of the
    unit factor comes from which of M_m -+ rho^m cancels deeper.
    """
    ctx = series.ctx
    M = series.moments
    if len(M) < 3:
        raise StabilizationError("moment extraction needs d_max >= 3")
    one = EisensteinElement.one(ctx)
    for mm in M:
        if mm.ord_pi() != 0:
            raise ArithmeticError("moment is not a unit")
    ratios = [M[i + 1] * M[i].inv() for i in range(len(M) - 1)]
    gaps = [(ratios[i + 1] - ratios[i]).ord_pi()
            for i in range(len(ratios) - 1)]
    cert = RatioCertificate(ratios, gaps)
    if not cert.monotone() or cert.stable_prec() < 1:
        raise StabilizationError("insufficient stabilization of moment "
                                 "ratios; raise d_max")
    value = ratios[-1]
    if (value - one).ord_pi() < 1:
        raise ArithmeticError("extracted root is not a 1-unit")
    floor = min(cert.stable_prec(), series.cert_prec)
    m = len(M)
    rm = value ** m
    d_plus = (M[-1] - rm).ord_pi()
    d_minus = (M[-1] + rm).ord_pi()
    if d_plus == d_minus:
        raise StabilizationError("unit-factor sign is not separated; "
                                 "raise d_max")
    e0 = 1 if d_plus > d_minus else -1
    return UnitRootResult(value, floor, "point-count",
                          {"ratio_gaps": gaps, "e0": e0,
                           "d_max": series.d_max,
                           "counts": dict(series.counts),
                           "assembly_floor": series.cert_prec})


# -- normalized splitting series over the lineality strata -------------------


@dataclass
class EtaDetail:
    """Lineality-strata series with its evaluation evidence."""

    series: ConeSeries
    degree_used: int
    trails: dict


def _lineality_window(fam: LaurentFamily, cap_r: int, cap_v: int):
    lam = parameter_cone(fam)
    sup = support_cone(fam)
    rs = tuple(r for r in range(-cap_r, cap_r + 1)
               if lam.contains((r,)) and lam.contains((-r,)))
    vs = tuple(v for v in range(-cap_v, cap_v + 1)
               if sup.contains((v,)) and sup.contains((-v,)))
    return rs, vs


def eta_detail(fam: LaurentFamily, D: int, N: int = 3,
               degree: int | None = None) -> EtaDetail:
    """Normalized splitting series restricted to the lineality strata.

    Each stratum's generating series is divided by the balanced series
    as formal series first - the quotients have p-integral, decaying
    coefficients even where numerator and denominator diverge - and the
    quotients are then evaluated at the lifted coefficients under a
    shared degree schedule.
    """
    if fam.s != 1 or fam.n != 1:
        raise ValueError("strata series support exactly one parameter "
                         "and one fiber variable")
    exact = _balance_rank(fam) == len(fam.terms)
    if degree is not None:
        caps = (degree,)
    elif exact:
        caps = (D + 4,)
    else:
        # wide windows can hold slow strata; retry deeper before giving up
        caps = (36, 72, 144)
    last = None
    for cap in caps:
        try:
            return _eta_at_degree(fam, D, N, cap, exact)
        except StabilizationError as err:
            last = err
    raise last


def _eta_at_degree(fam: LaurentFamily, D: int, N: int, cap: int,
                   exact: bool) -> EtaDetail:
    p = fam.p
    ctx = make_field_context(p, fam.a, N)
    target = (p - 1) * N
    rs, vs = _lineality_window(fam, D, D)
    window = {(r, v) for r in rs for v in vs if abs(r) + abs(v) <= D}
    window.add((0, 0))
    buckets = _balance_buckets(fam, cap, window)
    g00 = YSeries(p, len(fam.terms), buckets.get((0, 0), {}), cap, not exact)
    ginv = g00.inv(cap)
    point = _teichmuller_orbit(fam, ctx)[0]
    one = EisensteinElement.one(ctx)
    step = 1
    if not exact:
        rel = [sum(e) for e in g00.coeffs if sum(e) > 0]
        if not rel:
            raise StabilizationError("no balance relation found below the "
                                     "degree cap; raise it")
        step = min(rel)
    coeffs, trails = {(0, 0): one}, {}
    for key in sorted(window - {(0, 0)}):
        bucket = buckets.get(key)
        if not bucket:
            continue
        J = YSeries(p, len(fam.terms), bucket, cap, not exact)
        R = J.mul(ginv, cap)
        for e, c in R.coeffs.items():
            if not c.is_p_integral():
                raise ArithmeticError("integrality violation in stratum "
                                      "%r at %r" % (key, e))
        if exact:
            val = R.eval_at(ctx, point)
            trails[key] = "exact"
        else:
            evals = [(d, R.eval_at(ctx, point, degree=d))
                     for d in range(2 * step, cap + 1, step)]
            val, trails[key] = _settle(evals, target, "stratum %r" % (key,))
        if val.ord_pi() < 0:
            raise ArithmeticError("stratum value escapes the integers")
        if not val.is_zero_mod(val.prec_pi):
            coeffs[key] = val
    return EtaDetail(ConeSeries(2, coeffs), cap, trails)


def eta_series(fam: LaurentFamily, D: int, N: int = 3) -> ConeSeries:
    """Lineality-strata series; see eta_detail for the evidence variant."""
    return eta_detail(fam, D, N).series


# -- eigenvector identity ----------------------------------------------------


@dataclass
class EigenReport:
    """Outcome of the dual-operator eigenvector identity check."""

    passed: bool
    floor: int
    min_interior: int
    diffs: dict
    interior: tuple
    vec: dict
    root: UnitRootResult
    formula: UnitRootResult


def _vec_mul(d1: dict, d2: dict, t_max: int, r_cap: int, prec: int) -> dict:
    out = {}
    for (r1, m1), v1 in d1.items():
        for (r2, m2), v2 in d2.items():
            if len(m1) + len(m2) > t_max:
                continue
            r = r1 + r2
            if abs(r) > r_cap:
                continue
            v = v1 * v2
            if v.is_zero_mod(prec):
                continue
            key = (r, tuple(sorted(m1 + m2)))
            got = out.get(key)
            out[key] = v if got is None else got + v
    return {k: v for k, v in out.items() if not v.is_zero_mod(prec)}


def eigenvector_check(fam: LaurentFamily, kappa, trunc: SymTrunc = SymTrunc(),
                      N: int = 3, floor: int | None = None,
                      interior_lam: int | None = None) -> EigenReport:
    """Verify that the strata-series vector is an eigenvector of the dual
    operator with the closed-form value as eigenvalue.

    The vector's component at (r, monomial) is the binomial-weighted sum
    of products of strata coefficients; rescaling of the dual basis
    cancels every weight factor, leaving pure coefficient products.  Rows
    near the parameter window's edge absorb truncation error, so only
    rows inside `interior_lam` are judged against the floor.
    """
    p = fam.p
    kap = _as_kappa(p, kappa)
    need = p - 1 if floor is None else floor
    M = dual_beta_matrix(fam, kap, trunc, N)
    ctx = M.ctx
    prec = (p - 1) * N
    fm = formula_eval(fam, kap, N)
    eta = eta_detail(fam, trunc.d_lam + trunc.d_x, N).series.coeffs
    gens = tuple(v[0] for v in support_cone(fam).lattice_points(trunc.d_x)
                 if v[0] != 0)
    h = {}
    for u in (0,) + gens:
        for (r, v), val in eta.items():
            if v == -u and (r, u) != (0, 0):
                # the dual pairing negates both charges
                key = (-r, ()) if u == 0 else (-r, (u,))
                if val.ord_pi() < 1:
                    raise ArithmeticError("stratum coefficient is not "
                                          "topologically small")
                h[key] = val
    r_cap = trunc.d_lam + 2 * max([abs(r) for r, _ in h] + [0])
    vec = {(0, ()): EisensteinElement.one(ctx)}
    pw = dict(vec)
    rep = kap.rep_int()
    for l in range(1, prec + 1):
        pw = _vec_mul(pw, h, trunc.t_max, r_cap, prec)
        if not pw:
            break
        cb = math.comb(rep, l) % ctx.pmod
        if cb == 0:
            continue
        for key, v in pw.items():
            t = v.mul_int(cb)
            got = vec.get(key)
            vec[key] = t if got is None else got + t
    basis = set(M.basis)
    vec = {k: v for k, v in vec.items()
           if k in basis and not v.is_zero_mod(prec)}
    lhs = {}
    for col, colmap in M.cols.items():
        x = vec.get(col)
        if x is None:
            continue
        for row, e in colmap.items():
            t = e * x
            got = lhs.get(row)
            lhs[row] = t if got is None else got + t
    rhs = {k: fm.value * v for k, v in vec.items()}
    diffs = {}
    for key in set(lhs) | set(rhs):
        d = lhs.get(key, EisensteinElement.zero(ctx))
        r = rhs.get(key)
        if r is not None:
            d = d - r
        diffs[key] = min(d.ord_pi(), prec)
    edge = trunc.d_lam // 2 if interior_lam is None else interior_lam
    interior = tuple(sorted(k for k in diffs if abs(k[0]) <= edge))
    min_int = min([diffs[k] for k in interior] + [prec])
    head = vec[(0, ())]
    implied = lhs.get((0, ()), EisensteinElement.zero(ctx)) * head.inv()
    root = UnitRootResult(implied, min_int, "eigenvector",
                          {"components": len(vec), "judged": len(interior)})
    return EigenReport(min_int >= need, need, min_int, diffs, interior,
                       vec, root, fm)


# -- all routes against each other -------------------------------------------


@dataclass
class ThreeWayReport:
    """Pairwise agreement of the point-count, operator, and formula
    routes at the weakest certified precision."""

    results: dict
    pair_ords: dict
    min_prec: int
    passed: bool


def three_way_compare(fam: LaurentFamily, kappa, N: int = 3, d_max: int = 4,
                      trunc: SymTrunc = SymTrunc(),
                      lunit: LUnitSeries | None = None) -> ThreeWayReport:
    """Run all three routes to the unit root and compare pairwise.

    A difference below the weaker certificate of a pair is a hard
    failure; the report carries every value, certificate, and achieved
    agreement order.
    """
    if lunit is None:
        lunit = assemble_L_unit(fam, kappa, d_max, N)
    pc = extract_unit_root_of_Lunit(lunit)
    sr = beta_unit_root(fam, kappa, trunc, N)
    op = UnitRootResult(sr.value, sr.floor, "operator",
                        {"second_ord": sr.second_ord, "unique": sr.unique})
    fm = formula_eval(fam, kappa, N)
    results = {r.route: r for r in (pc, op, fm)}
    pair_ords, ok = {}, True
    names = sorted(results)
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            a, b = results[x], results[y]
            lim = min(a.certified_prec, b.certified_prec)
            got = min((a.value - b.value).ord_pi(), (fam.p - 1) * N)
            pair_ords[(x, y)] = got
            if got < lim:
                ok = False
    min_prec = min(r.certified_prec for r in results.values())
    return ThreeWayReport(results, pair_ords, min_prec, ok)


# -- plain exponential kernel (cross-check helper) ---------------------------


def _exp_constant_term(fam: LaurentFamily, ctx: FieldContext,
                       cap: int) -> EisensteinElement:
    """Constant stratum of the plain exponential product, weight-capped.

    Independent route to the balanced series evaluated at the lifted
    coefficients: the product is accumulated over (parameter, fiber)
    strata instead of enumerating balance relations.
    """
    if fam.s != 1 or fam.n != 1:
        raise ValueError("kernel cross-check supports one parameter and "
                         "one fiber variable")
    p = fam.p
    prec = (p - 1) * ctx.prec
    acc = {(0, 0): EisensteinElement.one(ctx)}
    for c, r, u in fam.terms:
        ahat = teichmuller(ctx, c)
        w = abs(r[0]) + abs(u[0])
        top = cap if w == 0 else cap // w
        fac = {}
        pw = EisensteinElement.one(ctx)
        lift = EisensteinElement.from_zq(ctx, ahat.coords)
        for i in range(top + 1):
            if i:
                pw = pw * lift
            co = PiRational.from_pi_power(p, i, Fraction(1, math.factorial(i)))
            val = co.to_eis(ctx) * pw
            if not val.is_zero_mod(prec):
                fac[(i * r[0], i * u[0])] = val
        out = {}
        for (a1, b1), c1 in acc.items():
            for (a2, b2), c2 in fac.items():
                e = (a1 + a2, b1 + b2)
                if abs(e[0]) + abs(e[1]) > cap:
                    continue
                v = c1 * c2
                got = out.get(e)
                out[e] = v if got is None else got + v
        acc = {e: v for e, v in out.items() if not v.is_zero_mod(prec)}
    return acc.get((0, 0), EisensteinElement.zero(ctx))
