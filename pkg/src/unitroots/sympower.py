"""Symmetric powers of the parameter-space Frobenius and their duals.

The fiber operators assemble into one global operator acting on series in the
parameter variable with coefficients in a symmetric algebra: one generator
e_u per nonzero fiber exponent u.  Raising the operator to a p-adic exponent
kappa means raising its image of 1 to the power kappa - t on degree-t
monomials, which converges because that image is a 1-unit.  This module
builds the truncated matrices of those operators, their duals on reciprocal
exponents, the adjointness pairing between the two, and the trace identity
that ties the global operator back to the verified fiber computations.

Bases are truncated by three knobs: monomial degree, generator weight, and
parameter weight.  Matrices are kept in the plain monomial basis; the
weight-normalized basis that makes the operator norm estimates clean differs
from it by a diagonal rescaling with fractional valuations, so the profile
checkers carry that rescaling as an explicit rational adjustment instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .cones import split_factor_coeffs, weight
from .counting import LaurentFamily, enumerate_closed_points
from .fiber import (RatioCertificate, fiber_operator, parameter_cone,
                    support_cone)
from .gf import gf_cache
from .padic import (EisensteinElement, KappaExponent, make_field_context,
                    teichmuller, zeta_p_embed)

_EMPTY = ()


def pitilde_ord_pi(fam: LaurentFamily) -> Fraction:
    """ord_pi of the weight normalizer, at its largest admissible choice.

    One normalizer unit per weight unit is what the kernel decay estimates
    are measured in; profile checks divide by this to convert observed
    pi-valuations.
    """
    w = fam.omega1 + fam.omega2
    if w == 0:
        raise ValueError("constant family has no weight normalizer")
    return Fraction((fam.p - 1) ** 2, fam.p ** 2 * w)


def _as_kappa(p: int, kappa) -> KappaExponent:
    if isinstance(kappa, KappaExponent):
        if kappa.p != p:
            raise ValueError("exponent characteristic mismatch")
        return kappa
    return KappaExponent.from_int(p, int(kappa))


@dataclass(frozen=True)
class SymMonomial:
    """Product of symmetric-algebra generators, kept in sorted order."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if any(u == 0 for u in parts):
            raise ValueError("zero is not a generator exponent")
        if list(parts) != sorted(parts):
            raise ValueError("monomial parts must be sorted")
        object.__setattr__(self, "parts", parts)

    @property
    def degree(self) -> int:
        return len(self.parts)

    @property
    def weight(self) -> int:
        return sum(abs(u) for u in self.parts)


@dataclass(frozen=True)
class SymTrunc:
    """Truncation knobs: monomial degree, generator weight, parameter weight."""

    t_max: int = 3
    d_x: int = 3
    d_lam: int = 3

    def scaled(self, t_max: int = 1, d_x: int = 1, d_lam: int = 1) -> "SymTrunc":
        return SymTrunc(self.t_max * t_max, self.d_x * d_x, self.d_lam * d_lam)


def _mono_weight(mono) -> int:
    return sum(abs(u) for u in mono)


# -- truncated symmetric-algebra arithmetic ----------------------------------


class _SymAlgebra:
    """Shared series arithmetic over keys (parameter exponent, monomial).

    Subclasses fill in the generator images self.A; everything else (products,
    1-unit powers, image assembly) is common to the global, dual, and fiber
    variants.
    """

    def _init_basis(self, fam: LaurentFamily, trunc: SymTrunc, gens, lam,
                    ctx, N: int):
        self.fam = fam
        self.trunc = trunc
        self.N = N
        self.ctx = ctx
        self.prec = (fam.p - 1) * N
        self.gens = tuple(gens)
        self.gen_set = frozenset(self.gens)
        monos = []
        for t in range(trunc.t_max + 1):
            monos.extend(itertools.combinations_with_replacement(self.gens, t))
        self.monos = tuple(monos)
        self.lam = tuple(lam)
        self.lam_set = frozenset(self.lam)
        self.cap_lam = (fam.q + 1) * max(trunc.d_lam, 1)
        self._pw = {}
        self._img = {}
        self._raw = {_EMPTY: {(0, _EMPTY): EisensteinElement.one(ctx)}}

    def _finish_images(self):
        """Validate the image of 1 and split off its contraction part."""
        one = EisensteinElement.one(self.ctx)
        head = self.A[0].get((0, _EMPTY))
        if head is None or not (head - one).is_zero_mod(1):
            raise ArithmeticError("image of 1 is not a 1-unit")
        eta = dict(self.A[0])
        eta[(0, _EMPTY)] = head - one
        self.eta = {k: v for k, v in eta.items()
                    if not v.is_zero_mod(self.prec)}
        self.margin = min((v.ord_pi() for v in self.eta.values()),
                          default=self.prec)
        if self.margin < 1:
            raise ArithmeticError("image of 1 has no contraction margin")

    def mul(self, d1: dict, d2: dict) -> dict:
        t_max = self.trunc.t_max
        cap = self.cap_lam
        out = {}
        for (s1, m1), c1 in d1.items():
            for (s2, m2), c2 in d2.items():
                if len(m1) + len(m2) > t_max:
                    continue
                s = s1 + s2
                if abs(s) > cap:
                    continue
                key = (s, tuple(sorted(m1 + m2)))
                c = c1 * c2
                got = out.get(key)
                out[key] = c if got is None else got + c
        return {k: v for k, v in out.items() if not v.is_zero_mod(self.prec)}

    def unit_power(self, x: int) -> dict:
        """(image of 1)^x by the binomial series in the contraction part.

        The binomial coefficients are exact falling factorials over j!, an
        integer for every integer x, so negative exponents cost nothing.
        """
        got = self._pw.get(x)
        if got is not None:
            return got
        ctx = self.ctx
        acc = {(0, _EMPTY): EisensteinElement.one(ctx)}
        etaj = dict(acc)
        fj = 1
        for j in range(1, self.prec + 1):
            etaj = self.mul(etaj, self.eta)
            if not etaj:
                break
            fj *= j
            num = 1
            for i in range(j):
                num *= x - i
            cb = (num // fj) % ctx.pmod
            if cb:
                for k, v in etaj.items():
                    term = v.mul_int(cb)
                    got2 = acc.get(k)
                    acc[k] = term if got2 is None else got2 + term
        acc = {k: v for k, v in acc.items() if not v.is_zero_mod(self.prec)}
        self._pw[x] = acc
        return acc

    def raw_product(self, mono) -> dict:
        got = self._raw.get(mono)
        if got is None:
            got = self.mul(self.raw_product(mono[:-1]), self.A[mono[-1]])
            self._raw[mono] = got
        return got

    def image(self, mono, exponent: int) -> dict:
        """Expansion of the operator on e_mono, with the given power of the
        image of 1 multiplied in."""
        key = (mono, exponent)
        got = self._img.get(key)
        if got is None:
            got = self.mul(self.raw_product(mono), self.unit_power(exponent))
            self._img[key] = got
        return got


class _GlobalSym(_SymAlgebra):
    """Images of the global operator (dual=False) or its dual (dual=True).

    Both read the same two-variable splitting kernel; they differ only in
    which kernel stratum a generator pulls: contraction v = (x + u)/q on the
    forward side, reflection v = q u - x on the dual side.
    """

    def __init__(self, fam: LaurentFamily, trunc: SymTrunc, N: int,
                 dual: bool):
        if fam.s != 1 or fam.n != 1:
            raise ValueError("symmetric powers support exactly one parameter "
                             "and one fiber variable")
        ctx = make_field_context(fam.p, fam.a, N)
        gens = tuple(v[0] for v in support_cone(fam).lattice_points(trunc.d_x)
                     if v[0] != 0)
        lam = tuple(r[0] for r in
                    parameter_cone(fam).lattice_points(trunc.d_lam))
        self._init_basis(fam, trunc, gens, lam, ctx, N)
        self.dual = dual
        kernel = _joint_kernel(fam, ctx, self.cap_lam
                               + (fam.q + 1) * trunc.d_x, self.prec)
        q = fam.q
        self.A = {}
        for u in (0,) + self.gens:
            ser = {}
            for (ws, wx), c in kernel.items():
                if abs(ws) > self.cap_lam:
                    continue
                if dual:
                    v = q * u - wx
                else:
                    t = wx + u
                    if t % q:
                        continue
                    v = t // q
                if v == 0:
                    ser[(ws, _EMPTY)] = c
                elif v in self.gen_set:
                    ser[(ws, (v,))] = c
            self.A[u] = ser
        # a term constant in both variables drops out of the kernel (its
        # twist cancels) but still multiplies every exponential sum by a
        # root of unity; carry it as a uniform character scalar, matching
        # the fiber operators
        e0 = 0
        K = gf_cache(fam.p, fam.a)
        for c, r, u in fam.terms:
            if r[0] == 0 and u[0] == 0:
                e0 = (e0 + K.trace(tuple(x % fam.p for x in c))) % fam.p
        if e0:
            z = zeta_p_embed(ctx) ** e0
            self.A = {u: {key: z * v for key, v in ser.items()}
                      for u, ser in self.A.items()}
        self._finish_images()


def _joint_kernel(fam: LaurentFamily, ctx, cap: int, prec: int) -> dict:
    """Two-variable splitting kernel at contraction step q, weight-capped.

    Product of one split factor per support term, monomial (r, u) jointly;
    coefficients below working precision are dropped as they appear, which
    keeps the product near its true (much sparser) support.  Retained
    coefficients are exact: the grading means terms above the cap never feed
    back into terms below it.
    """
    factors = []
    for c, r, u in fam.terms:
        monom = (r[0], u[0])
        if monom == (0, 0):
            continue
        a_hat = teichmuller(ctx, c)
        coeffs = split_factor_coeffs(
            ctx, cap // weight(monom),
            EisensteinElement.from_zq(ctx, a_hat.coords), fam.q)
        fac = {}
        for i, co in enumerate(coeffs):
            if not co.is_zero_mod(prec):
                fac[(i * monom[0], i * monom[1])] = co
        factors.append(fac)
    acc = {(0, 0): EisensteinElement.one(ctx)}
    for fac in factors:
        out = {}
        for (a1, b1), c1 in acc.items():
            for (a2, b2), c2 in fac.items():
                e = (a1 + a2, b1 + b2)
                if abs(e[0]) + abs(e[1]) > cap:
                    continue
                c = c1 * c2
                got = out.get(e)
                out[e] = c if got is None else got + c
        acc = {e: c for e, c in out.items() if not c.is_zero_mod(prec)}
    return acc


class _FiberSym(_SymAlgebra):
    """Symmetric-algebra images of one fiber operator.

    Generators are read off the fiber matrix columns; the parameter slot of
    every key is pinned at zero so all the shared machinery applies.
    """

    def __init__(self, fam: LaurentFamily, point, trunc: SymTrunc, N: int):
        if fam.n != 1:
            raise ValueError("fiber symmetric powers support one fiber "
                             "variable")
        op = fiber_operator(fam, point, N)
        if trunc.d_x > op.D:
            raise ValueError("generator weight knob exceeds the fiber basis")
        idx = {v[0]: i for i, v in enumerate(op.basis)}
        gens = tuple(v for v in sorted(idx) if v != 0 and abs(v) <= trunc.d_x)
        self._init_basis(fam, trunc, gens, (0,), op.ctx, N)
        self.A = {}
        for u in (0,) + self.gens:
            iu = idx[u]
            ser = {}
            for v, iv in idx.items():
                c = op.rows[iv][iu]
                if c.is_zero_mod(self.prec):
                    continue
                if v == 0:
                    ser[(0, _EMPTY)] = c
                elif v in self.gen_set:
                    ser[(0, (v,))] = c
            self.A[u] = ser
        self._finish_images()


_WS: dict = {}


def _workspace(fam: LaurentFamily, trunc: SymTrunc, N: int,
               dual: bool) -> _GlobalSym:
    key = (fam, trunc, N, dual)
    ws = _WS.get(key)
    if ws is None:
        ws = _GlobalSym(fam, trunc, N, dual)
        _WS[key] = ws
    return ws


def alpha_kappa_image(fam: LaurentFamily, kappa, e_u, trunc: SymTrunc,
                      ctx=None, N: int = 3) -> dict:
    """Expansion of the kappa-power operator on one monomial.

    Returns {(parameter exponent, monomial): coefficient}; `e_u` may be a
    SymMonomial or a sorted tuple of generator exponents.
    """
    if ctx is not None:
        N = ctx.prec
    mono = e_u.parts if isinstance(e_u, SymMonomial) else tuple(e_u)
    kap = _as_kappa(fam.p, kappa)
    ws = _workspace(fam, trunc, N, dual=False)
    for u in mono:
        if u not in ws.gen_set:
            raise ValueError(f"exponent {u} is not a generator at this "
                             "truncation")
    return ws.image(tuple(sorted(mono)), kap.rep_int() - len(mono))


# -- truncated operator matrices ---------------------------------------------


@dataclass
class SymOperatorTrunc:
    """Sparse column matrix of a symmetric-power operator.

    Keys are (parameter exponent, monomial); on the dual side a key (r, u)
    stands for the reciprocal basis element at those indices.  `cert_prec`
    is the pi-adic precision the entries are certified to, which a digit-
    string exponent caps below the working precision.
    """

    fam: LaurentFamily
    ctx: object
    kappa: KappaExponent
    trunc: SymTrunc
    dual: bool
    finite_k: int | None
    basis: tuple
    cols: dict
    cert_prec: int
    tail_ord_pi: Fraction

    @property
    def dim(self) -> int:
        return len(self.basis)

    def entry(self, row, col) -> EisensteinElement:
        got = self.cols[col].get(row)
        if got is None:
            return EisensteinElement.zero(self.ctx)
        return got

    def trace(self) -> EisensteinElement:
        acc = EisensteinElement.zero(self.ctx)
        for key, col in self.cols.items():
            got = col.get(key)
            if got is not None:
                acc = acc + got
        return acc

    def dense_rows(self) -> list:
        index = {key: i for i, key in enumerate(self.basis)}
        zero = EisensteinElement.zero(self.ctx)
        rows = [[zero] * self.dim for _ in range(self.dim)]
        for ckey, col in self.cols.items():
            j = index[ckey]
            for rkey, val in col.items():
                rows[index[rkey]][j] = val
        return rows

    def entry_ord_histogram(self) -> dict:
        hist = {}
        for col in self.cols.values():
            for val in col.values():
                o = val.ord_pi()
                hist[o] = hist.get(o, 0) + 1
        return dict(sorted(hist.items()))

    def nonzero_entries(self) -> int:
        return sum(len(col) for col in self.cols.values())


def _build_matrix(fam: LaurentFamily, kappa, trunc: SymTrunc, N: int,
                  dual: bool, finite_k: int | None) -> SymOperatorTrunc:
    ws = _workspace(fam, trunc, N, dual)
    if finite_k is not None:
        if finite_k < 0:
            raise ValueError("finite power must be nonnegative")
        kap = KappaExponent.from_int(fam.p, finite_k)
    else:
        kap = _as_kappa(fam.p, kappa)
    rep = kap.rep_int()
    q = fam.q
    cols = {}
    for mono in ws.monos:
        t = len(mono)
        if finite_k is not None and t > finite_k:
            img = {}
        else:
            img = ws.image(mono, rep - t)
        for r in ws.lam:
            col = {}
            for (w, vbar), c in img.items():
                if dual:
                    trow = q * r - w
                    if trow in ws.lam_set:
                        col[(trow, vbar)] = c
                else:
                    t2 = w + r
                    if t2 % q == 0 and (t2 // q) in ws.lam_set:
                        col[(t2 // q, vbar)] = c
            cols[(r, mono)] = col
    basis = tuple((r, mono) for r in ws.lam for mono in ws.monos)
    nd = kap.known_digits()
    cert = ws.prec if nd is None else min(ws.prec, (fam.p - 1) * nd)
    tail = (pitilde_ord_pi(fam) * (fam.p - 1)
            * (min(trunc.d_lam, trunc.d_x) + 1))
    return SymOperatorTrunc(fam, ws.ctx, kap, trunc, dual, finite_k,
                            basis, cols, cert, tail)


def beta_matrix(fam: LaurentFamily, kappa, trunc: SymTrunc = SymTrunc(),
                N: int = 3) -> SymOperatorTrunc:
    """Matrix of the kappa-power global operator: parameter-contraction
    composed with the symmetric-power image, entries read off at q s - r."""
    return _build_matrix(fam, kappa, trunc, N, dual=False, finite_k=None)


def finite_k_matrix(fam: LaurentFamily, k: int, trunc: SymTrunc = SymTrunc(),
                    N: int = 3) -> SymOperatorTrunc:
    """Plain-power approximation: exponent k - t, zero above degree k."""
    return _build_matrix(fam, k, trunc, N, dual=False, finite_k=k)


def dual_beta_matrix(fam: LaurentFamily, kappa, trunc: SymTrunc = SymTrunc(),
                     N: int = 3) -> SymOperatorTrunc:
    """Matrix of the dual operator on reciprocal exponents.

    The dual multiplies by the same kernel after a parameter-power
    substitution and projects back: entries read the kernel reflection
    stratum q u - v and the parameter stratum q r - t.
    """
    return _build_matrix(fam, kappa, trunc, N, dual=True, finite_k=None)


def dual_finite_k_matrix(fam: LaurentFamily, k: int,
                         trunc: SymTrunc = SymTrunc(),
                         N: int = 3) -> SymOperatorTrunc:
    return _build_matrix(fam, k, trunc, N, dual=True, finite_k=k)


# -- sparse traces, determinants, unit eigenvalue ----------------------------


def sym_power_traces(M: SymOperatorTrunc, count: int) -> list:
    """tr(M), tr(M^2), ..., tr(M^count) from the sparse columns.

    Path sums up to cubes; beyond that the matrix is densified, which is
    only sensible at small truncation knobs.
    """
    ctx = M.ctx
    out = []
    if count >= 1:
        out.append(M.trace())
    if count >= 2:
        acc = EisensteinElement.zero(ctx)
        for jkey, col in M.cols.items():
            for ikey, mij in col.items():
                back = M.cols[ikey].get(jkey)
                if back is not None:
                    acc = acc + mij * back
        out.append(acc)
    if count >= 3:
        acc = EisensteinElement.zero(ctx)
        for jkey, colj in M.cols.items():
            for kkey, mkj in colj.items():
                colk = M.cols[kkey]
                for ikey, mik in colk.items():
                    mji = M.cols[ikey].get(jkey)
                    if mji is not None:
                        acc = acc + mji * mik * mkj
        out.append(acc)
    if count >= 4:
        raise NotImplementedError("trace powers above 3 are not implemented")
    return out


def sym_fredholm(M: SymOperatorTrunc, K: int) -> list:
    """det(1 - M T) mod T^(K+1): Newton identities while the index stays
    a unit, principal minors (densified) beyond."""
    ctx = M.ctx
    p = ctx.p
    newton_span = min(K, p - 1)
    traces = sym_power_traces(M, newton_span) if newton_span else []
    es = [EisensteinElement.one(ctx)]
    for k in range(1, K + 1):
        if k < p:
            acc = EisensteinElement.zero(ctx)
            for i in range(1, k + 1):
                term = es[k - i] * traces[i - 1]
                acc = acc + (term if i % 2 == 1 else -term)
            es.append(acc.mul_int(pow(k, -1, ctx.pmod)))
        else:
            if M.dim > 60:
                raise ValueError("minor sums need a smaller basis")
            es.append(_dense_minor_sum(ctx, M.dense_rows(), k))
    coeffs = [EisensteinElement.one(ctx)]
    for k in range(1, K + 1):
        coeffs.append(es[k] if k % 2 == 0 else -es[k])
    return coeffs


def _dense_minor_sum(ctx, rows, k: int) -> EisensteinElement:
    acc = EisensteinElement.zero(ctx)
    for idx in itertools.combinations(range(len(rows)), k):
        acc = acc + _dense_det(ctx, [[rows[i][j] for j in idx] for i in idx])
    return acc


def _dense_det(ctx, Mat):
    n = len(Mat)
    if n == 1:
        return Mat[0][0]
    acc = EisensteinElement.zero(ctx)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in Mat[1:]]
        term = Mat[0][j] * _dense_det(ctx, minor)
        acc = acc + (term if j % 2 == 0 else -term)
    return acc


def _apply_cols(cols: dict, vec: dict) -> dict:
    out = {}
    for ckey, x in vec.items():
        col = cols.get(ckey)
        if col is None or x.is_zero_mod(x.prec_pi):
            continue
        for rkey, a in col.items():
            t = a * x
            got = out.get(rkey)
            out[rkey] = t if got is None else got + t
    return {k: v for k, v in out.items() if not v.is_zero_mod(v.prec_pi)}


@dataclass
class SymUnitRoot:
    """Unit eigenvalue of a symmetric-power matrix with its certificates."""

    value: EisensteinElement
    cert: RatioCertificate
    second_ord: int  # valuation floor of the second Fredholm coefficient
    floor: int       # precision certified by the eigenvector residual
    matrix: SymOperatorTrunc

    @property
    def unique(self) -> bool:
        return self.second_ord >= 1


def beta_unit_root(fam: LaurentFamily, kappa, trunc: SymTrunc = SymTrunc(),
                   N: int = 3) -> SymUnitRoot:
    """The unique slope-zero eigenvalue of the kappa-power operator.

    Power iteration from the empty monomial with ratio stabilization; the
    final iterate is an approximate eigenvector whose residual valuation
    certifies the value, and the Fredholm trace coefficients certify
    uniqueness (first a unit, second not).
    """
    M = beta_matrix(fam, kappa, trunc, N)
    ctx = M.ctx
    key0 = (0, _EMPTY)
    vec = {key0: EisensteinElement.one(ctx)}
    prev = vec[key0]
    ratios = []
    gaps = []
    for _ in range(M.cert_prec + 4):
        vec = _apply_cols(M.cols, vec)
        cur = vec.get(key0)
        if cur is None or cur.ord_pi() > 0:
            raise ArithmeticError("iteration lost its unit component")
        ratios.append(cur * prev.inv())
        prev = cur
        if len(ratios) >= 2:
            gaps.append((ratios[-1] - ratios[-2]).ord_pi())
            if gaps[-1] >= M.cert_prec:
                break
    cert = RatioCertificate(ratios, gaps)
    if not cert.monotone():
        raise ArithmeticError("ratio stabilization is not monotone")
    value = ratios[-1]
    floor = min(cert.stable_prec(), M.cert_prec)
    res = _apply_cols(M.cols, vec)
    for key in set(res) | set(vec):
        acc = res.get(key, EisensteinElement.zero(ctx))
        got = vec.get(key)
        if got is not None:
            acc = acc - value * got
        if acc.ord_pi() < floor:
            raise ArithmeticError("eigenvector residual exceeds the "
                                  "stabilized precision")
    dets = sym_fredholm(M, 2)
    if dets[1].ord_pi() != 0:
        raise ArithmeticError("no unit eigenvalue at this truncation")
    second = dets[2].ord_pi()
    if second < 1:
        raise ArithmeticError("unit eigenvalue is not unique")
    return SymUnitRoot(value, cert, second, floor, M)


# -- entry valuation profiles ------------------------------------------------


@dataclass
class ProfileReport:
    """Outcome of an entry-valuation bound check, in normalizer units."""

    passed: bool
    checked: int
    worst_margin: Fraction | None  # min of (observed - required)
    witness: tuple | None

    def __bool__(self) -> bool:
        return self.passed


def entry_profile_report(M: SymOperatorTrunc) -> ProfileReport:
    """Check every stored entry against its decay bound.

    Forward: the weight-normalized entry at row (s, v), column (r, u) needs
    at least (p-1)(|s| + |v|) normalizer units; the normalization differs
    from the plain entry by |r| - |s| + |u| - |v| units.  Dual: the image
    coefficient needs (p-1)|u| units, normalization |v| - |u| - |s'|/q with
    s' the kernel stratum q r - t.
    """
    fam = M.fam
    tpi = pitilde_ord_pi(fam)
    p = fam.p
    q = fam.q
    worst = None
    witness = None
    checked = 0
    for (r, ubar), col in M.cols.items():
        wu = _mono_weight(ubar)
        for (srow, vbar), c in col.items():
            if c.is_zero_mod(M.cert_prec):
                continue
            checked += 1
            wv = _mono_weight(vbar)
            base = Fraction(c.ord_pi()) / tpi
            if M.dual:
                stratum = Fraction(abs(q * r - srow), q)
                observed = base + wv - wu - stratum
                required = Fraction((p - 1) * wu)
            else:
                observed = base + abs(r) - abs(srow) + wu - wv
                required = Fraction((p - 1) * (abs(srow) + wv))
            margin = observed - required
            if worst is None or margin < worst:
                worst = margin
                witness = ((srow, vbar), (r, ubar))
    return ProfileReport(worst is None or worst >= 0, checked, worst, witness)


def image_profile_report(fam: LaurentFamily, kappa, trunc: SymTrunc,
                         N: int = 3, dual: bool = False) -> ProfileReport:
    """Check the raw operator images (before parameter contraction).

    Forward bound: (p-1)|s|/q + (p-1)|v| normalizer units on the normalized
    coefficient; dual bound: (p-1)|u|.  Both normalizations differ from the
    plain coefficients by |u| - |v| - |s|/q units (sign flipped on the dual).
    """
    ws = _workspace(fam, trunc, N, dual)
    kap = _as_kappa(fam.p, kappa)
    tpi = pitilde_ord_pi(fam)
    p, q = fam.p, fam.q
    worst = None
    witness = None
    checked = 0
    for mono in ws.monos:
        img = ws.image(mono, kap.rep_int() - len(mono))
        wu = _mono_weight(mono)
        for (s, vbar), c in img.items():
            if c.is_zero_mod(ws.prec):
                continue
            checked += 1
            wv = _mono_weight(vbar)
            base = Fraction(c.ord_pi()) / tpi
            stratum = Fraction(abs(s), q)
            if dual:
                observed = base + wv - wu - stratum
                required = Fraction((p - 1) * wu)
            else:
                observed = base + wu - wv - stratum
                required = (p - 1) * stratum + Fraction((p - 1) * wv)
            margin = observed - required
            if worst is None or margin < worst:
                worst = margin
                witness = (mono, (s, vbar))
    return ProfileReport(worst is None or worst >= 0, checked, worst, witness)


# -- finite-power convergence ------------------------------------------------


def default_k_sequence(p: int, kappa, levels: int) -> list:
    """k_l congruent to kappa mod p^l and strictly growing: residue + p^l."""
    kap = _as_kappa(p, kappa)
    rep = kap.rep_int()
    nd = kap.known_digits()
    if nd is not None and levels > nd:
        raise ValueError("not enough certified digits for that many levels")
    return [rep % p ** l + p ** l for l in range(1, levels + 1)]


@dataclass
class ConvergenceReport:
    """Finite-power approximation rates and determinant stabilization."""

    ks: list
    rate_rows: list  # per level: (observed min margin or None, required)
    det_ords: list   # agreement orders of det coefficients, last level vs kappa
    det_floor: int
    passed: bool


def convergence_check(fam: LaurentFamily, kappa, ks=None,
                      trunc: SymTrunc = SymTrunc(), N: int = 3,
                      det_K: int = 2, det_floor: int | None = None
                      ) -> ConvergenceReport:
    """Finite plain powers converge to the kappa power at the stated rate.

    The difference of the k_l matrix and the kappa matrix must have
    normalized valuation at least min((p-1) l in pi-units, (1 - 1/q) k_l in
    normalizer units); the Fredholm coefficients must agree to the floor by
    the last level.
    """
    p, q = fam.p, fam.q
    kap = _as_kappa(p, kappa)
    if ks is None:
        ks = default_k_sequence(p, kap, 2)
    tpi = pitilde_ord_pi(fam)
    Mk = beta_matrix(fam, kap, trunc, N)
    if det_floor is None:
        det_floor = min(Mk.cert_prec, 2 * (p - 1))
    rate_rows = []
    passed = True
    for l, k in enumerate(ks, start=1):
        Ml = finite_k_matrix(fam, k, trunc, N)
        required = min(Fraction((p - 1) * l) / tpi, Fraction(q - 1, q) * k)
        observed = None
        keys = set()
        for ckey, col in Ml.cols.items():
            keys.update((ckey, rkey) for rkey in col)
        for ckey, col in Mk.cols.items():
            keys.update((ckey, rkey) for rkey in col)
        for ckey, rkey in keys:
            diff = Ml.entry(rkey, ckey) - Mk.entry(rkey, ckey)
            if diff.is_zero_mod(Mk.cert_prec):
                continue
            (r, ubar), (srow, vbar) = ckey, rkey
            adj = (abs(r) - abs(srow) + _mono_weight(ubar)
                   - _mono_weight(vbar))
            val = Fraction(diff.ord_pi()) / tpi + adj
            if observed is None or val < observed:
                observed = val
        rate_rows.append((observed, required))
        if observed is not None and observed < required:
            passed = False
    det_last = sym_fredholm(finite_k_matrix(fam, ks[-1], trunc, N), det_K)
    det_kap = sym_fredholm(Mk, det_K)
    det_ords = [(a - b).ord_pi() for a, b in zip(det_last, det_kap)]
    if any(o < det_floor for o in det_ords):
        passed = False
    return ConvergenceReport(list(ks), rate_rows, det_ords, det_floor, passed)


# -- pairing and adjointness -------------------------------------------------


def pairing_weight(k: int, mono) -> Fraction:
    """Diagonal weight of the degree-k pairing on a monomial of degree <= k.

    Averaging the diagonal matchings over all k! slot permutations leaves
    (k-t)! pad matchings times the part multiplicities.
    """
    t = len(mono)
    if t > k:
        raise ValueError("monomial degree exceeds the pairing degree")
    mult = 1
    for u in set(mono):
        mult *= math.factorial(mono.count(u))
    return Fraction(math.factorial(k - t) * mult, math.factorial(k))


def _cleared_weight(k: int, mono) -> int:
    """Pairing weight with the common k! denominator cleared."""
    mult = 1
    for u in set(mono):
        mult *= math.factorial(mono.count(u))
    return math.factorial(k - len(mono)) * mult


@dataclass
class PairingReport:
    """Adjointness of the degree-k operator and its dual under the pairing."""

    k: int
    pairs_checked: int
    floor: int
    worst_ord: int
    passed: bool
    witness: tuple | None


def pairing_check(fam: LaurentFamily, k: int, trunc: SymTrunc = SymTrunc(),
                  N: int = 3, floor: int | None = None) -> PairingReport:
    """Entrywise adjointness: forward entries against reflected dual entries.

    Pairing a forward image against a dual basis vector collapses the sums
    to single entries, so adjointness is the entry identity
    forward[(r', v), (r, u)] * w(v) = dual[(r, u), (r', v)] * w(u), with the
    weights cleared of their common k! so no division ever happens.
    """
    if k > trunc.t_max:
        raise ValueError("pairing degree exceeds the monomial degree knob")
    F = finite_k_matrix(fam, k, trunc, N)
    Dm = dual_finite_k_matrix(fam, k, trunc, N)
    if floor is None:
        floor = F.cert_prec
    pairs = set()
    for ckey, col in F.cols.items():
        if len(ckey[1]) > k:
            continue
        pairs.update((ckey, rkey) for rkey in col if len(rkey[1]) <= k)
    for ckey, col in Dm.cols.items():
        if len(ckey[1]) > k:
            continue
        pairs.update((rkey, ckey) for rkey in col if len(rkey[1]) <= k)
    worst = None
    witness = None
    for fwd_col, fwd_row in pairs:
        lhs = F.entry(fwd_row, fwd_col).mul_int(_cleared_weight(k, fwd_row[1]))
        rhs = Dm.entry(fwd_col, fwd_row).mul_int(
            _cleared_weight(k, fwd_col[1]))
        o = (lhs - rhs).ord_pi()
        if worst is None or o < worst:
            worst = o
            witness = (fwd_col, fwd_row)
    if worst is None:
        worst = floor
    return PairingReport(k, len(pairs), floor, worst, worst >= floor, witness)


# -- determinant duality -----------------------------------------------------


@dataclass
class DetDualityReport:
    """Fredholm determinants of the operator and its dual, compared."""

    rows: list  # (label, [agreement ord per T-coefficient], floor)
    passed: bool


def det_duality_check(fam: LaurentFamily, kappa, ks=None,
                      trunc: SymTrunc = SymTrunc(), N: int = 3,
                      K: int = 2, kappa_floor: int | None = None
                      ) -> DetDualityReport:
    """det(1 - M T) must match det(1 - M* T) for finite powers and for kappa.

    Finite powers are checked at the full certified precision; the kappa row
    uses its own (possibly digit-capped) floor.
    """
    p = fam.p
    kap = _as_kappa(p, kappa)
    if ks is None:
        ks = default_k_sequence(p, kap, 2)
    rows = []
    passed = True
    for k in ks:
        cf = sym_fredholm(finite_k_matrix(fam, k, trunc, N), K)
        cd = sym_fredholm(dual_finite_k_matrix(fam, k, trunc, N), K)
        ords = [(a - b).ord_pi() for a, b in zip(cf, cd)]
        floor = (p - 1) * N
        rows.append((f"k={k}", ords, floor))
        if any(o < floor for o in ords):
            passed = False
    cf = sym_fredholm(beta_matrix(fam, kap, trunc, N), K)
    cd = sym_fredholm(dual_beta_matrix(fam, kap, trunc, N), K)
    ords = [(a - b).ord_pi() for a, b in zip(cf, cd)]
    floor = kappa_floor
    if floor is None:
        nd = kap.known_digits()
        floor = (p - 1) * N if nd is None else min((p - 1) * N, (p - 1) * nd)
    rows.append(("kappa", ords, floor))
    if any(o < floor for o in ords):
        passed = False
    return DetDualityReport(rows, passed)


# -- trace identity against the fibers ---------------------------------------


def fiber_sym_matrix(fam: LaurentFamily, point, kappa,
                     trunc: SymTrunc = SymTrunc(), N: int = 3
                     ) -> SymOperatorTrunc:
    """Symmetric-power matrix of one fiber operator, keys (0, monomial)."""
    ws = _FiberSym(fam, point, trunc, N)
    kap = _as_kappa(fam.p, kappa)
    rep = kap.rep_int()
    cols = {}
    for mono in ws.monos:
        img = ws.image(mono, rep - len(mono))
        cols[(0, mono)] = dict(img)
    basis = tuple((0, mono) for mono in ws.monos)
    nd = kap.known_digits()
    cert = ws.prec if nd is None else min(ws.prec, (fam.p - 1) * nd)
    tail = pitilde_ord_pi(fam) * (fam.p - 1) * (trunc.d_x + 1)
    return SymOperatorTrunc(fam, ws.ctx, kap, trunc, False, None,
                            basis, cols, cert, tail)


def _embed_base(ctx_big, x: EisensteinElement) -> EisensteinElement:
    """Carry an element with rational-integer components into a larger
    unramified field; only valid when the source field is the prime one."""
    if len(x.comps[0]) != 1:
        raise ValueError("can only embed from the prime field")
    comps = tuple((c[0],) + (0,) * (ctx_big.a - 1) for c in x.comps)
    return EisensteinElement(ctx_big, comps, x.prec_pi)


@dataclass
class TraceIdentityReport:
    """Global symmetric-power trace against the fiber-sum route."""

    m: int
    lhs: EisensteinElement
    rhs: EisensteinElement
    diff_ord: int
    per_degree: dict
    passed: bool
    floor: int


def trace_identity_check(fam: LaurentFamily, kappa, m: int = 1,
                         trunc: SymTrunc = SymTrunc(), N: int = 3,
                         floor: int | None = None) -> TraceIdentityReport:
    """(q^m - 1)^s tr(M^m) must equal the fiber symmetric-power trace sum.

    The fiber sum runs over all parameter points of the degree-m torus; a
    closed point of degree d carries d conjugate points and its operator
    accounts for them with the power m/d.
    """
    if fam.s != 1:
        raise ValueError("trace identity supports one parameter")
    kap = _as_kappa(fam.p, kappa)
    M = beta_matrix(fam, kap, trunc, N)
    if floor is None:
        floor = min(M.cert_prec, 2 * (fam.p - 1))
    lhs = sym_power_traces(M, m)[m - 1]
    scale = (fam.q ** m - 1) ** fam.s
    lhs = lhs.mul_int(scale)
    big = m > 1
    if big and fam.a != 1:
        raise ValueError("trace powers beyond 1 need a prime base field")
    ctx_big = make_field_context(fam.p, fam.a * m, N)
    acc = EisensteinElement.zero(ctx_big)
    per_degree = {}
    points = enumerate_closed_points(fam.p, fam.a, fam.s, m)
    for d, pts in points.items():
        if m % d:
            continue
        dacc = EisensteinElement.zero(ctx_big)
        for pt in pts:
            Fm = fiber_sym_matrix(fam, pt, kap, trunc, N)
            tr = sym_power_traces(Fm, m // d)[m // d - 1].mul_int(d)
            if fam.a * pt.degree != fam.a * m:
                tr = _embed_base(ctx_big, tr)
            dacc = dacc + tr
        per_degree[d] = dacc
        acc = acc + dacc
    lhs_big = _embed_base(ctx_big, lhs) if big else lhs
    diff = (lhs_big - acc).ord_pi()
    return TraceIdentityReport(m, lhs, acc, diff, per_degree, diff >= floor,
                               floor)
