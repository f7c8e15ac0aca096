"""Lattice cones and truncated formal series supported on them.

The series type is dimension-generic and coefficient-generic: coefficients
only need +, * and (for valuation checks) ord_pi.  Supports are kept as exact
exponent dictionaries; truncation is by L1 weight, matching the decay profile
of the splitting kernels, so a truncated product is the truncation of the
full product.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import factorial

from .padic import EisensteinElement, FieldContext, embed_pi_rational


def weight(vec) -> int:
    """L1 weight of an exponent vector."""
    return sum(abs(v) for v in vec)


# -- cones -------------------------------------------------------------------


class Cone:
    """Rational polyhedral cone in Z^dim given by generators.

    The facet description comes from exact Fourier-Motzkin projection of
    {x = V t, t >= 0}, so membership is a list of integer dot products; this
    is exact in any dimension and for non-full-dimensional cones.
    """

    def __init__(self, dim: int, generators):
        self.dim = dim
        self.generators = tuple(tuple(g) for g in generators)
        for g in self.generators:
            if len(g) != dim:
                raise ValueError("generator dimension mismatch")
        self.ineqs = self._facets()
        for g in self.generators:
            if not self.contains(g):
                raise AssertionError("generator escapes its own cone")
        self._points = {}

    def _facets(self):
        k = len(self.generators)
        d = self.dim
        rows = []
        # columns: t_1..t_k then x_1..x_d; each row is an inequality >= 0
        for i in range(k):
            rows.append([Fraction(1 if j == i else 0) for j in range(k)]
                        + [Fraction(0)] * d)
        for j in range(d):
            eq = [Fraction(-self.generators[i][j]) for i in range(k)]
            eq += [Fraction(1 if l == j else 0) for l in range(d)]
            rows.append(eq[:])
            rows.append([-c for c in eq])
        for col in range(k):
            pos = [r for r in rows if r[col] > 0]
            neg = [r for r in rows if r[col] < 0]
            zero = [r for r in rows if r[col] == 0]
            combined = []
            for rp in pos:
                for rn in neg:
                    row = [rp[col] * b - rn[col] * a
                           for a, b in zip(rp, rn)]
                    combined.append(row)
            rows = zero + combined
        out = set()
        for r in rows:
            tail = r[k:]
            if all(c == 0 for c in tail):
                continue
            den = math.lcm(*[c.denominator for c in tail])
            ints = [int(c * den) for c in tail]
            g = math.gcd(*[abs(c) for c in ints])
            out.add(tuple(c // g for c in ints))
        return tuple(sorted(out))

    def contains(self, vec) -> bool:
        return all(sum(a * x for a, x in zip(row, vec)) >= 0
                   for row in self.ineqs)

    def lattice_points(self, cap: int):
        """All integer points of the cone with L1 weight <= cap, lex sorted."""
        got = self._points.get(cap)
        if got is not None:
            return got
        pts = []
        for vec in _l1_ball(self.dim, cap):
            if self.contains(vec):
                pts.append(vec)
        pts = tuple(sorted(pts))
        self._points[cap] = pts
        return pts


def _l1_ball(dim: int, cap: int):
    if dim == 0:
        yield ()
        return
    for v in range(-cap, cap + 1):
        for rest in _l1_ball(dim - 1, cap - abs(v)):
            yield (v,) + rest


# -- formal series -----------------------------------------------------------


class ConeSeries:
    """Finite formal sum coeff * Z^exponent over an arbitrary coefficient ring."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs=None):
        self.dim = dim
        self.coeffs = dict(coeffs) if coeffs else {}

    @staticmethod
    def monomial(dim: int, expo, coeff) -> "ConeSeries":
        return ConeSeries(dim, {tuple(expo): coeff})

    def __add__(self, other):
        if not isinstance(other, ConeSeries) or other.dim != self.dim:
            return NotImplemented
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            got = out.get(e)
            out[e] = c if got is None else got + c
        return ConeSeries(self.dim, out)

    def mul(self, other: "ConeSeries", cap: int, axes=None) -> "ConeSeries":
        """Product truncated to L1 weight <= cap (over `axes` if given)."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        sel = range(self.dim) if axes is None else axes
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(abs(e[i]) for i in sel) > cap:
                    continue
                c = c1 * c2
                got = out.get(e)
                out[e] = c if got is None else got + c
        return ConeSeries(self.dim, out)

    def scal(self, c) -> "ConeSeries":
        return ConeSeries(self.dim, {e: c * v for e, v in self.coeffs.items()})

    def map_coeffs(self, fn) -> "ConeSeries":
        return ConeSeries(self.dim, {e: fn(v) for e, v in self.coeffs.items()})

    def dilate(self, k: int, axes=None) -> "ConeSeries":
        """Substitute Z_i -> Z_i^k on the chosen axes."""
        sel = set(range(self.dim) if axes is None else axes)
        out = {}
        for e, c in self.coeffs.items():
            ne = tuple(v * k if i in sel else v for i, v in enumerate(e))
            out[ne] = c
        return ConeSeries(self.dim, out)

    def extract_dilation(self, k: int, axes=None) -> "ConeSeries":
        """The dilation operator: keep exponents divisible by k on the axes
        and divide them; everything else is annihilated."""
        sel = set(range(self.dim) if axes is None else axes)
        out = {}
        for e, c in self.coeffs.items():
            if any(v % k for i, v in enumerate(e) if i in sel):
                continue
            ne = tuple(v // k if i in sel else v for i, v in enumerate(e))
            got = out.get(ne)
            out[ne] = c if got is None else got + c
        return ConeSeries(self.dim, out)

    def project(self, keep_axes) -> "ConeSeries":
        """Restrict to terms constant in the dropped axes, reindexed."""
        keep = list(keep_axes)
        drop = [i for i in range(self.dim) if i not in keep]
        out = {}
        for e, c in self.coeffs.items():
            if any(e[i] for i in drop):
                continue
            ne = tuple(e[i] for i in keep)
            got = out.get(ne)
            out[ne] = c if got is None else got + c
        return ConeSeries(len(keep), out)

    def coeff(self, expo, zero=None):
        return self.coeffs.get(tuple(expo), zero)

    def eval(self, values):
        """Substitute ring elements for the variables; exponents may be
        negative (inverses must exist)."""
        acc = None
        for e, c in self.coeffs.items():
            term = c
            for v, ei in zip(values, e):
                if ei:
                    term = term * v ** ei
            acc = term if acc is None else acc + term
        if acc is None:
            raise ValueError("empty series has no evaluation")
        return acc

    def support(self):
        return sorted(self.coeffs)


def series_product(factors, cap: int, axes=None) -> ConeSeries:
    if not factors:
        raise ValueError("empty product")
    acc = factors[0]
    for f in factors[1:]:
        acc = acc.mul(f, cap, axes=axes)
    return acc


def dump_series(series: ConeSeries, render=repr) -> str:
    lines = []
    for e in series.support():
        lines.append(" ".join(str(v) for v in e) + "\t" + render(series.coeffs[e]))
    return "\n".join(lines)


# -- splitting kernels -------------------------------------------------------


def split_factor_coeffs(ctx: FieldContext, i_max: int, c: EisensteinElement,
                        step: int, c_plus: EisensteinElement | None = None):
    """Coefficients of exp(pi(c T - c' T^step)) up to T^i_max.

    [T^i] = sum_j (-1)^j c^(i - step*j) c'^j pi^(i-(step-1)j) / ((i-step*j)! j!);
    every term is integral, with ord_pi = digit sums of the two indices.
    """
    if c_plus is None:
        c_plus = c
    cp = [EisensteinElement.one(ctx)]
    cpp = [EisensteinElement.one(ctx)]
    for _ in range(i_max):
        cp.append(cp[-1] * c)
    for _ in range(i_max // step + 1):
        cpp.append(cpp[-1] * c_plus)
    out = []
    for i in range(i_max + 1):
        acc = EisensteinElement.zero(ctx)
        for j in range(i // step + 1):
            k = i - step * j
            base = embed_pi_rational(
                ctx, [(i - (step - 1) * j,
                       Fraction((-1) ** j, factorial(k) * factorial(j)))])
            acc = acc + base * cp[k] * cpp[j]
        out.append(acc)
    return out


def splitting_kernel(ctx: FieldContext, terms, step: int, cap: int) -> ConeSeries:
    """H = prod_b exp(pi c_b (Z^{m_b} - Z^{step * m_b})) truncated at weight cap.

    `terms` is a list of (c_b, monomial vector); zero monomials contribute the
    factor exp(0) = 1 and are skipped.
    """
    dim = len(terms[0][1])
    factors = []
    for c, monom in terms:
        if all(v == 0 for v in monom):
            continue
        w = weight(monom)
        i_max = cap // w
        coeffs = split_factor_coeffs(ctx, i_max, c, step)
        fac = ConeSeries(dim, {
            tuple(i * v for v in monom): coeffs[i] for i in range(i_max + 1)})
        factors.append(fac)
    if not factors:
        return ConeSeries.monomial(dim, (0,) * dim, EisensteinElement.one(ctx))
    return series_product(factors, cap)


def level_kernel(ctx: FieldContext, pair_terms, cap: int,
                 step: int | None = None) -> ConeSeries:
    """One chain level: prod_b exp(pi (c_b Z^{m_b} - c'_b Z^{step m_b})).

    With c'_b the next-level twist.  A zero monomial only telescopes away when
    c = c'; otherwise the factor diverges and the level kernel is undefined.
    """
    if step is None:
        step = ctx.p
    dim = len(pair_terms[0][2])
    factors = []
    for c, c_plus, monom in pair_terms:
        if all(v == 0 for v in monom):
            if not c == c_plus:
                raise ValueError(
                    "level kernel diverges: constant support with c != c'")
            continue
        w = weight(monom)
        i_max = cap // w
        coeffs = split_factor_coeffs(ctx, i_max, c, step, c_plus)
        fac = ConeSeries(dim, {
            tuple(i * v for v in monom): coeffs[i] for i in range(i_max + 1)})
        factors.append(fac)
    if not factors:
        return ConeSeries.monomial(dim, (0,) * dim, EisensteinElement.one(ctx))
    return series_product(factors, cap)


def valuation_check(series: ConeSeries, slope: Fraction) -> bool:
    """Every coefficient satisfies ord_pi >= slope * weight(exponent).

    Coefficients that vanish at working precision pass vacuously.
    """
    for e, c in series.coeffs.items():
        bound = slope * weight(e)
        if c.is_zero_mod(c.prec_pi):
            continue
        if Fraction(c.ord_pi()) < bound:
            return False
    return True
