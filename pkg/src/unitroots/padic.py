"""Exact p-adic arithmetic with explicit precision tracking.

Three nested rings, all represented by integer coordinate vectors:

* Z_p under a fixed modulus p^N (plain ints),
* the unramified extension Z_q, q = p^a, as Z_p[t]/(h(t)) where h is the
  canonical monic irreducible lift (coefficients in 0..p-1) of the distinguished
  degree-a irreducible over F_p,
* the Eisenstein extension O = Z_q[pi]/(pi^(p-1) + p), so ord_pi(p) = p - 1.

An Eisenstein element is known modulo pi^prec_pi; binary operations return the
minimum of the operand precisions.  The pi-coordinate for pi^j is a Z_q element
stored mod p^N and trusted mod p^ceil((prec_pi - j)/(p-1)).

Exact cyclotomic integers Z[zeta_p] live in their own coordinate class and meet
the p-adic side only through `zeta_p_embed`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


def ord_p_int(x: int, p: int, cap: int) -> int:
    """p-adic valuation of an integer, capped at `cap` (the value for x == 0)."""
    if x % (p ** cap) == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# canonical irreducible polynomials over F_p


def _poly_mod_mul(f, g, p):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return out


def _poly_mod_rem(f, g, p):
    # g monic
    f = list(f)
    dg = len(g) - 1
    while len(f) - 1 >= dg and len(f) > 1:
        c = f[-1] % p
        if c:
            shift = len(f) - 1 - dg
            for j in range(dg + 1):
                f[shift + j] = (f[shift + j] - c * g[j]) % p
        f.pop()
    while len(f) > 1 and f[-1] % p == 0:
        f.pop()
    return f


def _monic_polys(p, d):
    # all monic polynomials of degree d over F_p, low coefficients first
    for code in range(p ** d):
        coeffs = []
        c = code
        for _ in range(d):
            coeffs.append(c % p)
            c //= p
        yield coeffs + [1]


def _divides(f, g, p) -> bool:
    r = _poly_mod_rem(f, g, p)
    return len(r) == 1 and r[0] % p == 0


@lru_cache(maxsize=None)
def canonical_irreducible(p: int, d: int) -> tuple:
    """Distinguished monic irreducible of degree d over F_p.

    Among all monic irreducibles of degree d the one whose non-leading
    coefficient vector (c_0, ..., c_{d-1}) encodes the smallest integer
    sum(c_i p^i).  Degree 1 yields t itself.
    """
    if d == 1:
        return (0, 1)
    for f in _monic_polys(p, d):
        if f[0] % p == 0:
            continue
        if all(not _divides(f, g, p) for e in range(1, d // 2 + 1)
               for g in _monic_polys(p, e)):
            return tuple(f)
    raise RuntimeError(f"no irreducible of degree {d} over F_{p}")


# ---------------------------------------------------------------------------
# field context


class FieldContext:
    """Shared modulus data for Z_q = Z_p[t]/(h) and O = Z_q[pi]/(pi^(p-1)+p).

    Holds p, a, the working p-adic precision N, the lifted modulus h, and the
    Hensel-lifted image sigma(t) defining the Witt Frobenius.
    """

    def __init__(self, p: int, a: int, prec: int):
        if prec < 1 or a < 1:
            raise ValueError("need prec >= 1 and a >= 1")
        self.p = p
        self.a = a
        self.prec = prec
        self.q = p ** a
        self.pmod = p ** prec
        self.h = tuple(canonical_irreducible(p, a))
        self._red_rows = self._reduction_rows()
        self._sigma_pows = None  # lazy: powers of sigma(t)

    # -- raw Z_q arithmetic on int tuples of length a ----------------------

    def _reduction_rows(self):
        # t^(a+i) mod h for i = 0..a-2, as length-a rows mod p^N
        a, m = self.a, self.pmod
        rows = []
        cur = [(-self.h[j]) % m for j in range(a)]  # t^a
        rows.append(tuple(cur))
        for _ in range(a - 2):
            nxt = [0] * a
            carry = cur[a - 1]
            for j in range(a - 1):
                nxt[j + 1] = cur[j]
            if carry:
                top = rows[0]
                for j in range(a):
                    nxt[j] = (nxt[j] + carry * top[j]) % m
            rows.append(tuple(nxt))
            cur = nxt
        return rows

    def zq_zero(self):
        return (0,) * self.a

    def zq_one(self):
        return (1,) + (0,) * (self.a - 1)

    def zq_from_int(self, c: int):
        return (c % self.pmod,) + (0,) * (self.a - 1)

    def zq_add(self, x, y):
        m = self.pmod
        return tuple((u + v) % m for u, v in zip(x, y))

    def zq_sub(self, x, y):
        m = self.pmod
        return tuple((u - v) % m for u, v in zip(x, y))

    def zq_neg(self, x):
        m = self.pmod
        return tuple((-u) % m for u in x)

    def zq_scal(self, c, x):
        m = self.pmod
        c %= m
        return tuple((c * u) % m for u in x)

    def zq_mul(self, x, y):
        a, m = self.a, self.pmod
        if a == 1:
            return ((x[0] * y[0]) % m,)
        conv = [0] * (2 * a - 1)
        for i, u in enumerate(x):
            if u:
                for j, v in enumerate(y):
                    conv[i + j] += u * v
        out = [c % m for c in conv[:a]]
        for i in range(a, 2 * a - 1):
            c = conv[i] % m
            if c:
                row = self._red_rows[i - a]
                for j in range(a):
                    out[j] = (out[j] + c * row[j]) % m
        return tuple(out)

    def zq_pow(self, x, e: int):
        if e < 0:
            return self.zq_pow(self.zq_inv(x), -e)
        r = self.zq_one()
        b = x
        while e:
            if e & 1:
                r = self.zq_mul(r, b)
            b = self.zq_mul(b, b)
            e >>= 1
        return r

    def zq_ord_p(self, x) -> int:
        return min(ord_p_int(c, self.p, self.prec) for c in x)

    def zq_inv(self, x):
        """Inverse of a p-adic unit: residue inverse then Newton lifting."""
        if self.zq_ord_p(x) != 0:
            raise ZeroDivisionError("not a unit in Z_q")
        inv0 = self._residue_inv(tuple(c % self.p for c in x))
        y = inv0
        k = 1
        while k < self.prec:
            # y <- y (2 - x y), doubles correct digits
            t = self.zq_mul(x, y)
            t = self.zq_sub(self.zq_from_int(2), t)
            y = self.zq_mul(y, t)
            k *= 2
        return y

    def _residue_inv(self, x):
        # extended Euclid in F_p[t] against h
        p = self.p
        if self.a == 1:
            return (pow(x[0], -1, p),)
        r0, r1 = list(self.h), [c % p for c in x]
        while len(r1) > 1 and r1[-1] == 0:
            r1.pop()
        s0, s1 = [0], [1]
        while not (len(r1) == 1 and r1[0] == 0):
            # divide r0 by r1
            q = [0] * (len(r0) - len(r1) + 1)
            r = list(r0)
            inv_lead = pow(r1[-1], -1, p)
            for i in range(len(r) - len(r1), -1, -1):
                c = (r[i + len(r1) - 1] * inv_lead) % p
                q[i] = c
                if c:
                    for j in range(len(r1)):
                        r[i + j] = (r[i + j] - c * r1[j]) % p
            while len(r) > 1 and r[-1] == 0:
                r.pop()
            s_new = [c % p for c in self._poly_sub(s0, _poly_mod_mul(q, s1, p), p)]
            r0, r1 = r1, r
            s0, s1 = s1, s_new
        c = pow(r0[0], -1, p)
        inv = [(c * v) % p for v in _poly_mod_rem(s0, list(self.h), p)]
        inv += [0] * (self.a - len(inv))
        return tuple(inv[: self.a])

    @staticmethod
    def _poly_sub(f, g, p):
        n = max(len(f), len(g))
        f = f + [0] * (n - len(f))
        g = g + [0] * (n - len(g))
        return [(u - v) % p for u, v in zip(f, g)]

    # -- Witt Frobenius ----------------------------------------------------

    def _sigma_t(self):
        """Hensel root of h congruent to t^p mod p: the image sigma(t)."""
        a = self.a
        if a == 1:
            return self.zq_zero()
        t = (0, 1) + (0,) * (a - 2)
        z = self.zq_pow(t, self.p)
        # Newton: z <- z - h(z)/h'(z)
        k = 1
        while k < self.prec:
            hz = self._h_eval(z)
            dz = self._h_deriv_eval(z)
            z = self.zq_sub(z, self.zq_mul(hz, self.zq_inv(dz)))
            k *= 2
        return z

    def _h_eval(self, z):
        r = self.zq_zero()
        for c in reversed(self.h):
            r = self.zq_mul(r, z)
            r = self.zq_add(r, self.zq_from_int(c))
        return r

    def _h_deriv_eval(self, z):
        r = self.zq_zero()
        for i in range(self.a, 0, -1):
            r = self.zq_mul(r, z)
            r = self.zq_add(r, self.zq_from_int(i * self.h[i]))
        return r

    def sigma_pows(self):
        if self._sigma_pows is None:
            st = self._sigma_t()
            pows = [self.zq_one()]
            for _ in range(self.a - 1):
                pows.append(self.zq_mul(pows[-1], st))
            self._sigma_pows = pows
        return self._sigma_pows

    def zq_sigma(self, x):
        if self.a == 1:
            return x
        pows = self.sigma_pows()
        r = self.zq_zero()
        for i, c in enumerate(x):
            if c:
                r = self.zq_add(r, self.zq_scal(c, pows[i]))
        return r

    def __repr__(self):
        return f"FieldContext(p={self.p}, a={self.a}, prec={self.prec})"


@lru_cache(maxsize=None)
def make_field_context(p: int, a: int, prec: int) -> FieldContext:
    """Shared context per (p, a, prec); element ops require a common context."""
    return FieldContext(p, a, prec)


# ---------------------------------------------------------------------------
# element classes


class UnramifiedElement:
    """Element of Z_q as a power-basis coordinate vector mod p^prec."""

    __slots__ = ("ctx", "coords", "prec")

    def __init__(self, ctx: FieldContext, coords, prec: int | None = None):
        self.ctx = ctx
        self.coords = tuple(c % ctx.pmod for c in coords)
        self.prec = ctx.prec if prec is None else min(prec, ctx.prec)

    def _co(self, other):
        if isinstance(other, int):
            other = UnramifiedElement(self.ctx, self.ctx.zq_from_int(other))
        if not isinstance(other, UnramifiedElement) or other.ctx is not self.ctx:
            return NotImplemented
        return other

    def __add__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return UnramifiedElement(self.ctx, self.ctx.zq_add(self.coords, o.coords),
                                 min(self.prec, o.prec))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return UnramifiedElement(self.ctx, self.ctx.zq_sub(self.coords, o.coords),
                                 min(self.prec, o.prec))

    def __neg__(self):
        return UnramifiedElement(self.ctx, self.ctx.zq_neg(self.coords), self.prec)

    def __mul__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return UnramifiedElement(self.ctx, self.ctx.zq_mul(self.coords, o.coords),
                                 min(self.prec, o.prec))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return UnramifiedElement(self.ctx, self.ctx.zq_inv(self.coords), self.prec) ** (-e)
        return UnramifiedElement(self.ctx, self.ctx.zq_pow(self.coords, e), self.prec)

    def inv(self):
        return UnramifiedElement(self.ctx, self.ctx.zq_inv(self.coords), self.prec)

    def sigma(self):
        return UnramifiedElement(self.ctx, self.ctx.zq_sigma(self.coords), self.prec)

    def ord_p(self) -> int:
        return min(self.ctx.zq_ord_p(self.coords), self.prec)

    def eq_mod(self, other, k: int) -> bool:
        o = self._co(other)
        m = self.ctx.p ** min(k, self.prec, o.prec)
        return all((u - v) % m == 0 for u, v in zip(self.coords, o.coords))

    def __eq__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return False
        return self.eq_mod(o, min(self.prec, o.prec))

    def __hash__(self):
        return hash((self.coords, self.prec))

    def __repr__(self):
        return f"Zq{list(self.coords)}"


class EisensteinElement:
    """Element of O = Z_q[pi]/(pi^(p-1)+p), known mod pi^prec_pi."""

    __slots__ = ("ctx", "comps", "prec_pi")

    def __init__(self, ctx: FieldContext, comps, prec_pi: int | None = None):
        self.ctx = ctx
        self.comps = tuple(tuple(c % ctx.pmod for c in comp) for comp in comps)
        cap = (ctx.p - 1) * ctx.prec
        self.prec_pi = cap if prec_pi is None else min(prec_pi, cap)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(ctx, prec_pi=None):
        return EisensteinElement(ctx, [ctx.zq_zero()] * (ctx.p - 1), prec_pi)

    @staticmethod
    def one(ctx, prec_pi=None):
        comps = [ctx.zq_one()] + [ctx.zq_zero()] * (ctx.p - 2)
        return EisensteinElement(ctx, comps, prec_pi)

    @staticmethod
    def from_int(ctx, c, prec_pi=None):
        comps = [ctx.zq_from_int(c)] + [ctx.zq_zero()] * (ctx.p - 2)
        return EisensteinElement(ctx, comps, prec_pi)

    @staticmethod
    def from_zq(ctx, coords, pi_power: int = 0, prec_pi=None):
        """coords * pi^pi_power as an Eisenstein element."""
        e = EisensteinElement.zero(ctx, prec_pi)
        return e._set(pi_power, coords)

    @staticmethod
    def pi(ctx, prec_pi=None):
        if ctx.p == 2:
            # pi = -2 when p = 2: pi^1 relation pi + 2 = 0
            return EisensteinElement.from_int(ctx, -2, prec_pi)
        comps = [ctx.zq_zero(), ctx.zq_one()] + [ctx.zq_zero()] * (ctx.p - 3)
        return EisensteinElement(ctx, comps, prec_pi)

    def _set(self, j, coords):
        ctx = self.ctx
        comps = list(self.comps)
        if ctx.p == 2:
            comps[0] = ctx.zq_add(comps[0], ctx.zq_scal((-2) ** j, coords)) \
                if j else ctx.zq_add(comps[0], coords)
            return EisensteinElement(ctx, comps, self.prec_pi)
        while j >= ctx.p - 1:
            coords = ctx.zq_scal(-ctx.p, coords)
            j -= ctx.p - 1
        comps[j] = ctx.zq_add(comps[j], coords)
        return EisensteinElement(ctx, comps, self.prec_pi)

    # -- arithmetic --------------------------------------------------------

    def _co(self, other):
        if isinstance(other, int):
            other = EisensteinElement.from_int(self.ctx, other)
        if not isinstance(other, EisensteinElement) or other.ctx is not self.ctx:
            return NotImplemented
        return other

    def __add__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        ctx = self.ctx
        comps = [ctx.zq_add(u, v) for u, v in zip(self.comps, o.comps)]
        return EisensteinElement(ctx, comps, min(self.prec_pi, o.prec_pi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        ctx = self.ctx
        comps = [ctx.zq_sub(u, v) for u, v in zip(self.comps, o.comps)]
        return EisensteinElement(ctx, comps, min(self.prec_pi, o.prec_pi))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        ctx = self.ctx
        return EisensteinElement(ctx, [ctx.zq_neg(u) for u in self.comps], self.prec_pi)

    def __mul__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        ctx = self.ctx
        n = ctx.p - 1
        slots = [ctx.zq_zero()] * (2 * n - 1)
        for i, u in enumerate(self.comps):
            if any(u):
                for j, v in enumerate(o.comps):
                    if any(v):
                        slots[i + j] = ctx.zq_add(slots[i + j], ctx.zq_mul(u, v))
        comps = list(slots[:n])
        for e in range(n, 2 * n - 1):
            # pi^e = -p * pi^(e-n)
            comps[e - n] = ctx.zq_add(comps[e - n], ctx.zq_scal(-ctx.p, slots[e]))
        return EisensteinElement(ctx, comps, min(self.prec_pi, o.prec_pi))

    __rmul__ = __mul__

    def mul_int(self, c: int):
        ctx = self.ctx
        return EisensteinElement(ctx, [ctx.zq_scal(c, u) for u in self.comps],
                                 self.prec_pi)

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        r = EisensteinElement.one(self.ctx, self.prec_pi)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def inv(self):
        """Inverse of a unit (ord_pi == 0) by Newton iteration."""
        ctx = self.ctx
        if self.ord_pi() != 0:
            raise ZeroDivisionError("not a unit in O")
        y = EisensteinElement.from_zq(ctx, ctx.zq_inv(self.comps[0]),
                                     prec_pi=self.prec_pi)
        k = 1
        while k < self.prec_pi:
            y = y * (EisensteinElement.from_int(ctx, 2, self.prec_pi) - self * y)
            k *= 2
        return y

    # -- valuation and comparison -----------------------------------------

    def ord_pi(self) -> int:
        """pi-adic valuation, capped at prec_pi (returned for 0)."""
        ctx = self.ctx
        best = self.prec_pi
        for j, comp in enumerate(self.comps):
            # trust component j only below the digit ceiling implied by prec_pi
            cap_j = max(0, -(-(self.prec_pi - j) // (ctx.p - 1)))
            if cap_j == 0:
                continue
            v = min(ord_p_int(c, ctx.p, cap_j) for c in comp)
            if v < cap_j:
                best = min(best, (ctx.p - 1) * v + j)
        return best

    def is_zero_mod(self, k: int) -> bool:
        return self.ord_pi() >= min(k, self.prec_pi)

    def eq_mod_pi(self, other, k: int) -> bool:
        o = self._co(other)
        return (self - o).is_zero_mod(k)

    def __eq__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return False
        return self.eq_mod_pi(o, min(self.prec_pi, o.prec_pi))

    def __hash__(self):
        return hash(self.comps)

    def unit_part_zq(self):
        """For an element of Z_q * pi^0 shape, its Z_q coordinate."""
        return UnramifiedElement(self.ctx, self.comps[0])

    def sigma(self):
        ctx = self.ctx
        return EisensteinElement(ctx, [ctx.zq_sigma(u) for u in self.comps],
                                 self.prec_pi)

    def with_prec(self, prec_pi: int):
        return EisensteinElement(self.ctx, self.comps, min(prec_pi, self.prec_pi))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        ctx = self.ctx
        digs = []
        for j, comp in enumerate(self.comps):
            nj = max(0, -(-(self.prec_pi - j) // (ctx.p - 1)))
            digs.append([c % (ctx.p ** nj) if nj else 0 for c in comp])
        return {"p": ctx.p, "a": ctx.a, "prec_pi": self.prec_pi, "pi_digits": digs}

    @staticmethod
    def from_json(ctx: FieldContext, obj: dict) -> "EisensteinElement":
        if obj["p"] != ctx.p or obj["a"] != ctx.a:
            raise ValueError("context mismatch")
        return EisensteinElement(ctx, obj["pi_digits"], obj["prec_pi"])

    def __repr__(self):
        return f"Eis({[list(c) for c in self.comps]}, prec_pi={self.prec_pi})"


# ---------------------------------------------------------------------------
# Teichmueller lift and Frobenius


def teichmuller(ctx: FieldContext, xbar) -> UnramifiedElement:
    """The root of unity (or 0) in Z_q reducing to xbar in F_q.

    Computed by iterating y -> y^q, which gains at least one p-adic digit per
    step from any lift of xbar.
    """
    if isinstance(xbar, int):
        coords = ctx.zq_from_int(xbar % ctx.p)
    else:
        coords = tuple(c % ctx.p for c in xbar)
        coords = coords + (0,) * (ctx.a - len(coords))
    y = coords
    for _ in range(ctx.prec + 1):
        y = ctx.zq_pow(y, ctx.q)
    return UnramifiedElement(ctx, y)


def frobenius_sigma(x: UnramifiedElement) -> UnramifiedElement:
    return x.sigma()


# ---------------------------------------------------------------------------
# exact pi-rational coefficients and their embedding


def embed_pi_rational(ctx: FieldContext, terms) -> EisensteinElement:
    """Embed sum of f * pi^k (f rational, k >= 0 an int) into O.

    Each f = p^e * u with u a p-unit maps p^e to (-pi^(p-1))^e; the combined
    pi-power must stay nonnegative or the value is not integral.
    """
    out = EisensteinElement.zero(ctx)
    for k, f in terms:
        f = Fraction(f)
        if f == 0:
            continue
        num, den = f.numerator, f.denominator
        e = 0
        while num % ctx.p == 0:
            num //= ctx.p
            e += 1
        while den % ctx.p == 0:
            den //= ctx.p
            e -= 1
        kk = k + e * (ctx.p - 1)
        if kk < 0:
            raise ValueError("non-integral pi-rational value")
        sign = (-1) ** (e % 2)
        c = (sign * num * pow(den, -1, ctx.pmod)) % ctx.pmod
        out = out._set(kk, ctx.zq_from_int(c))
    return out


# ---------------------------------------------------------------------------
# splitting function coefficients


def theta_coeffs(ctx: FieldContext, i_max: int, c: EisensteinElement | None = None):
    """Coefficients of exp(pi c (T - T^p)) up to degree i_max.

    With c omitted this is the classical splitting function; its value at a
    Teichmueller point multiplies out to the additive character.  Each
    (i, j)-term pi^(i-(p-1)j) c^(i-(p-1)j) / ((i-pj)! j!) is individually
    integral, so the sum is exact at working precision.
    """
    p = ctx.p
    cpows = None
    if c is not None:
        cpows = [EisensteinElement.one(ctx)]
        for _ in range(i_max):
            cpows.append(cpows[-1] * c)
    out = []
    for i in range(i_max + 1):
        acc = EisensteinElement.zero(ctx)
        for j in range(i // p + 1):
            k = i - (p - 1) * j
            f = Fraction((-1) ** j, math.factorial(i - p * j) * math.factorial(j))
            term = embed_pi_rational(ctx, [(k, f)])
            if cpows is not None and k:
                term = term * cpows[k]
            acc = acc + term
        out.append(acc)
    return out


def zeta_p_embed(ctx: FieldContext, coords=None) -> EisensteinElement:
    """Image of zeta_p (or of a cyclotomic integer) under zeta_p -> Theta(1).

    Theta(1) = sum theta_i converges since ord_pi theta_i >= (p-1)^2 i / p^2;
    the cut keeps every term that can touch the working precision.
    """
    prec = (ctx.p - 1) * ctx.prec
    i_cut = (prec * ctx.p * ctx.p) // ((ctx.p - 1) ** 2) + ctx.p + 1
    thetas = theta_coeffs(ctx, i_cut)
    z = EisensteinElement.zero(ctx)
    for t in thetas:
        z = z + t
    if coords is None:
        return z
    out = EisensteinElement.zero(ctx)
    zp = EisensteinElement.one(ctx)
    for cj in coords:
        if cj:
            if isinstance(cj, Fraction):
                out = out + zp * embed_pi_rational(ctx, [(0, cj)])
            else:
                out = out + zp.mul_int(int(cj))
        zp = zp * z
    return out


# ---------------------------------------------------------------------------
# exact cyclotomic integers


class CyclotomicInt:
    """Element of Z[zeta_p] (or Q(zeta_p) with Fraction coords).

    Coordinates are taken against the basis 1, zeta, ..., zeta^(p-2) with the
    relation 1 + zeta + ... + zeta^(p-1) = 0.
    """

    __slots__ = ("p", "coords")

    def __init__(self, p: int, coords):
        coords = list(coords)
        if len(coords) > p - 1:
            raise ValueError("too many coordinates")
        coords += [0] * (p - 1 - len(coords))
        self.p = p
        self.coords = tuple(coords)

    @staticmethod
    def from_exponent_counts(p: int, counts) -> "CyclotomicInt":
        """sum counts[e] * zeta^e over e = 0..p-1, reduced to the basis."""
        counts = list(counts) + [0] * (p - len(counts))
        top = counts[p - 1]
        return CyclotomicInt(p, [counts[e] - top for e in range(p - 1)])

    @staticmethod
    def zero(p):
        return CyclotomicInt(p, [])

    @staticmethod
    def one(p):
        return CyclotomicInt(p, [1])

    def _co(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicInt(self.p, [other])
        if not isinstance(other, CyclotomicInt) or other.p != self.p:
            return NotImplemented
        return other

    def __add__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.p, [u + v for u, v in zip(self.coords, o.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.p, [u - v for u, v in zip(self.coords, o.coords)])

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return CyclotomicInt(self.p, [-u for u in self.coords])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicInt(self.p, [u * other for u in self.coords])
        if not isinstance(other, CyclotomicInt) or other.p != self.p:
            return NotImplemented
        p = self.p
        raw = [0] * p
        for i, u in enumerate(self.coords):
            if u:
                for j, v in enumerate(other.coords):
                    if v:
                        raw[(i + j) % p] += u * v
        top = raw[p - 1]
        return CyclotomicInt(p, [raw[e] - top for e in range(p - 1)])

    __rmul__ = __mul__

    def scal_div(self, d):
        return CyclotomicInt(self.p, [Fraction(u, 1) / d for u in self.coords])

    def is_integral(self) -> bool:
        return all(Fraction(u).denominator == 1 for u in self.coords)

    def as_int_coords(self):
        if not self.is_integral():
            raise ValueError("non-integral cyclotomic value")
        return tuple(int(u) for u in self.coords)

    def rational_part(self):
        """The coefficient vector if the value is rational, else None."""
        if all(u == 0 for u in self.coords[1:]):
            return self.coords[0]
        return None

    def inv(self) -> "CyclotomicInt":
        """Field inverse in Q(zeta_p) via the multiplication matrix."""
        p = self.p
        n = p - 1
        cols = []
        for j in range(n):
            basis = CyclotomicInt(p, [0] * j + [1])
            cols.append((self * basis).coords)
        # solve M x = e_0 where M[i][j] = coefficient i of self * zeta^j
        M = [[Fraction(cols[j][i]) for j in range(n)] for i in range(n)]
        rhs = [Fraction(1 if i == 0 else 0) for i in range(n)]
        x = _solve_linear(M, rhs)
        if x is None:
            raise ZeroDivisionError("zero cyclotomic element")
        return CyclotomicInt(p, x)

    def __eq__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return False
        return all(Fraction(u) == Fraction(v) for u, v in zip(self.coords, o.coords))

    def __hash__(self):
        return hash((self.p, tuple(Fraction(u) for u in self.coords)))

    def __repr__(self):
        return f"Cyc(p={self.p}, {list(self.coords)})"


def _solve_linear(M, rhs):
    """Gaussian elimination over Q; returns None for singular systems."""
    n = len(M)
    A = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [u - f * v for u, v in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# p-adic exponents


@dataclass(frozen=True)
class KappaExponent:
    """A p-adic integer exponent: base-p digits, lowest first.

    Plain nonnegative integers keep their exact value, so binomial series in
    them terminate; a bare digit string is the truncation it claims to be and
    powers taken with it carry a correspondingly capped precision.
    """

    p: int
    digits: tuple
    exact: int | None = None

    @staticmethod
    def from_int(p: int, k: int, ndigits: int = 0) -> "KappaExponent":
        if k < 0:
            raise ValueError("negative exponents not supported")
        digs, kk = [], k
        while kk:
            digs.append(kk % p)
            kk //= p
        while len(digs) < ndigits:
            digs.append(0)
        return KappaExponent(p, tuple(digs), k)

    @staticmethod
    def from_digits(p: int, digits) -> "KappaExponent":
        digits = tuple(int(d) % p for d in digits)
        return KappaExponent(p, digits, None)

    def rep_int(self) -> int:
        if self.exact is not None:
            return self.exact
        return sum(d * self.p ** i for i, d in enumerate(self.digits))

    def known_digits(self) -> int | None:
        """None means exact; otherwise the count of certified base-p digits."""
        return None if self.exact is not None else len(self.digits)

    def minus(self, t: int) -> "KappaExponent":
        """kappa - t for a small nonnegative integer t <= kappa's representative."""
        r = self.rep_int() - t
        if r < 0:
            raise ValueError("kappa - t went negative at the representative")
        out = KappaExponent.from_int(self.p, r)
        if self.exact is None:
            return KappaExponent(self.p, out.digits[: len(self.digits)] or (0,), None)
        return out


def unit_pow_kappa(u: EisensteinElement, kappa: KappaExponent) -> EisensteinElement:
    """u^kappa for a 1-unit u via the binomial series sum C(kappa,l)(u-1)^l.

    C(kappa, l) lies in Z_p, so the l-th term has ord_pi >= l and the series
    is cut at the working precision.  For a digit-string kappa the result is
    certified only mod pi^ord(u^(p^L) - 1), L the digit count.
    """
    ctx = u.ctx
    x = u - EisensteinElement.one(ctx)
    if x.ord_pi() < 1:
        raise ValueError("unit_pow_kappa needs a 1-unit")
    rep = kappa.rep_int()
    prec = u.prec_pi
    acc = EisensteinElement.one(ctx, prec)
    xp = EisensteinElement.one(ctx, prec)
    for l in range(1, prec + 1):
        xp = xp * x
        if xp.is_zero_mod(prec):
            break
        cb = math.comb(rep, l) % ctx.pmod
        if cb:
            acc = acc + xp.mul_int(cb)
    nd = kappa.known_digits()
    if nd is not None:
        w = u ** (ctx.p ** nd)
        cap = (w - EisensteinElement.one(ctx)).ord_pi()
        acc = acc.with_prec(cap)
    return acc


# ---------------------------------------------------------------------------
# exact pi-rationals


class PiRational:
    """Exact element of Q(pi), coordinates over the basis pi^0 .. pi^(p-2).

    pi^(p-1) = -p folds higher powers back with a rational factor, so the
    valuation of a sum is read off componentwise:
    ord_pi = min_v (v + (p-1) ord_p r_v).
    """

    __slots__ = ("p", "coords")

    def __init__(self, p: int, coords):
        coords = [Fraction(c) for c in coords]
        if len(coords) > p - 1:
            raise ValueError("too many coordinates")
        coords += [Fraction(0)] * (p - 1 - len(coords))
        self.p = p
        self.coords = tuple(coords)

    @staticmethod
    def zero(p):
        return PiRational(p, [])

    @staticmethod
    def one(p):
        return PiRational(p, [1])

    @staticmethod
    def from_pi_power(p, v: int, r) -> "PiRational":
        """r * pi^v, any integer v, folded to the canonical basis."""
        r = Fraction(r)
        n = p - 1
        w = v % n
        r = r * Fraction(-p) ** ((v - w) // n)
        coords = [Fraction(0)] * n
        coords[w] = r
        return PiRational(p, coords)

    def _co(self, other):
        if isinstance(other, (int, Fraction)):
            return PiRational(self.p, [other])
        if not isinstance(other, PiRational) or other.p != self.p:
            return NotImplemented
        return other

    def __add__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return PiRational(self.p, [u + v for u, v in zip(self.coords, o.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return o
        return PiRational(self.p, [u - v for u, v in zip(self.coords, o.coords)])

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return PiRational(self.p, [-u for u in self.coords])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PiRational(self.p, [u * other for u in self.coords])
        if not isinstance(other, PiRational) or other.p != self.p:
            return NotImplemented
        n = self.p - 1
        out = [Fraction(0)] * n
        for i, u in enumerate(self.coords):
            if u:
                for j, v in enumerate(other.coords):
                    if v:
                        w = i + j
                        if w >= n:
                            out[w - n] += u * v * (-self.p)
                        else:
                            out[w] += u * v
        return PiRational(self.p, out)

    __rmul__ = __mul__

    def ord_pi(self):
        """Exact pi-adic valuation; math.inf for zero."""
        best = math.inf
        for v, r in enumerate(self.coords):
            if r:
                e = v + (self.p - 1) * _frac_ord_p(r, self.p)
                best = min(best, e)
        return best

    def is_p_integral(self) -> bool:
        return self.ord_pi() >= 0

    def to_eis(self, ctx: FieldContext) -> EisensteinElement:
        if ctx.p != self.p:
            raise ValueError("prime mismatch")
        acc = EisensteinElement.zero(ctx)
        for v, r in enumerate(self.coords):
            if r:
                acc = acc + embed_pi_rational(ctx, [(v, r)])
        return acc

    def __eq__(self, other):
        o = self._co(other)
        if o is NotImplemented:
            return False
        return self.coords == o.coords

    def __hash__(self):
        return hash((self.p,) + self.coords)

    def __repr__(self):
        parts = [f"{r}*pi^{v}" for v, r in enumerate(self.coords) if r]
        return " + ".join(parts) if parts else "0"


def _frac_ord_p(r: Fraction, p: int) -> int:
    num, den = r.numerator, r.denominator
    e = 0
    while num % p == 0:
        num //= p
        e += 1
    while den % p == 0:
        den //= p
        e -= 1
    return e
