"""Truncated Dwork operators on fibers and their trace/determinant data.

The fiber operator over a degree-d parameter point is psi^(ad) composed with
multiplication by the splitting kernel of the fiber Laurent polynomial.  On
the weight-truncated monomial basis of the fiber support cone its matrix has
entries read straight off the kernel, entry(v, u) = B(p^m v - u).  Traces
recover the exact exponential sums, the Fredholm determinant carries the
L-function, and ratio stabilization of iterated traces extracts the unit
root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .cones import Cone, ConeSeries, level_kernel, splitting_kernel
from .counting import ClosedPoint, LaurentFamily, exp_sum
from .gf import gf_cache
from .padic import (EisensteinElement, FieldContext, make_field_context,
                    teichmuller, zeta_p_embed)


def truncation_weight(p: int, m: int, N: int, omega: int) -> int:
    """Basis weight bound D so truncation error stays below p^N.

    Cycles through an omitted index of weight > D pick up kernel valuation at
    slope (p-1)(p^m - 1)/(p^(m+1) omega) per unit weight, whence the ceiling.
    """
    return int(math.ceil(Fraction(N * p ** (m + 1) * omega,
                                  (p - 1) * (p ** m - 1))))


def fiber_coefficients(fam: LaurentFamily, point: ClosedPoint,
                       ctx: FieldContext):
    """Teichmuller data (a_b, lam^(r_b), u_b) of the fiber polynomial.

    The family coefficient and the parameter part stay separate: chain levels
    twist lam by powers of Frobenius while a_b never moves.
    """
    ad = fam.a * point.degree
    K = gf_cache(fam.p, ad)
    lam = [teichmuller(ctx, coords) for coords in point.coords]
    out = []
    for c, r, u in fam.terms:
        a_hat = teichmuller(ctx, K.embed_from(fam.a, c))
        lam_pow = None
        for li, ri in zip(lam, r):
            if ri:
                lp = li ** ri
                lam_pow = lp if lam_pow is None else lam_pow * lp
        out.append((a_hat, lam_pow, u))
    return out


def fiber_kernel(fam: LaurentFamily, point: ClosedPoint, ctx: FieldContext,
                 cap: int) -> ConeSeries:
    """Splitting kernel H_m(lam, X), m = a*d, built directly at step p^m."""
    m = fam.a * point.degree
    terms = []
    for a_hat, lam_pow, u in fiber_coefficients(fam, point, ctx):
        c = a_hat if lam_pow is None else a_hat * lam_pow
        terms.append((EisensteinElement.from_zq(ctx, c.coords), u))
    return splitting_kernel(ctx, terms, fam.p ** m, cap)


def constant_character(fam: LaurentFamily, point: ClosedPoint,
                       ctx: FieldContext) -> int:
    """Character exponent of the x-constant part of the fiber polynomial.

    A support vector u = 0 contributes no kernel factor; its additive
    character value zeta_p^Tr(c) scales the whole operator instead.  The
    twisted theta series at such a coefficient has no valuation growth, so
    the scalar cannot be recovered as a coefficient sum; the trace of the
    residue is the convergent value of the telescoped factor.
    """
    m = fam.a * point.degree
    K = gf_cache(fam.p, m)
    e = 0
    for a_hat, lam_pow, u in fiber_coefficients(fam, point, ctx):
        if any(u):
            continue
        c = a_hat if lam_pow is None else a_hat * lam_pow
        e = (e + K.trace(tuple(x % fam.p for x in c.coords))) % fam.p
    return e


def _scale_rows(ctx, rows, e: int):
    if not e:
        return rows
    s = zeta_p_embed(ctx) ** e
    return [[s * x for x in row] for row in rows]


@dataclass
class TruncOperator:
    """Matrix of psi^m . H on the basis {X^u : u in cone, |u| <= D}."""

    ctx: FieldContext
    m: int
    basis: tuple
    rows: list  # rows[v][u] = entry(v, u)
    D: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def trace(self) -> EisensteinElement:
        acc = EisensteinElement.zero(self.ctx)
        for i in range(self.dim):
            acc = acc + self.rows[i][i]
        return acc


def support_cone(fam: LaurentFamily) -> Cone:
    return Cone(fam.n, fam.fiber_supports())


def parameter_cone(fam: LaurentFamily) -> Cone:
    return Cone(fam.s, fam.param_supports())


def operator_from_kernel(ctx: FieldContext, kernel: ConeSeries, step: int,
                         basis, D: int, m: int) -> TruncOperator:
    zero = EisensteinElement.zero(ctx)
    rows = []
    for v in basis:
        row = []
        for u in basis:
            need = tuple(step * vi - ui for vi, ui in zip(v, u))
            row.append(kernel.coeff(need, zero))
        rows.append(row)
    return TruncOperator(ctx, m, tuple(basis), rows, D)


def fiber_operator(fam: LaurentFamily, point: ClosedPoint, N: int,
                   D: int | None = None) -> TruncOperator:
    """alpha = psi^(ad) . H_(ad)(lam, X) truncated to weight D."""
    m = fam.a * point.degree
    if D is None:
        D = truncation_weight(fam.p, m, N, fam.omega1 + fam.omega2)
    ctx = make_field_context(fam.p, m, N)
    step = fam.p ** m
    cap = (step + 1) * D
    kernel = fiber_kernel(fam, point, ctx, cap)
    basis = support_cone(fam).lattice_points(D)
    op = operator_from_kernel(ctx, kernel, step, basis, D, m)
    op.rows = _scale_rows(ctx, op.rows, constant_character(fam, point, ctx))
    return op


def level_operator(fam: LaurentFamily, point: ClosedPoint, j: int, N: int,
                   D: int) -> TruncOperator:
    """One chain factor psi^a . H_a(lam^(q^j), X) on the truncated basis.

    Levels step by q, not p: the pair coefficient c' = sigma^a(c) then fixes
    the family coefficient, which keeps the cancellation that makes each
    level kernel decay.  A p-step chain loses that for a > 1 and its
    truncation drifts.
    """
    m = fam.a * point.degree
    ctx = make_field_context(fam.p, m, N)
    pair_terms = []
    for a_hat, lam_pow, u in fiber_coefficients(fam, point, ctx):
        if not any(u):
            continue  # constant support: scalar applied by the chain
        if lam_pow is None:
            c = cp = a_hat
        else:
            lj = lam_pow
            for _ in range(fam.a * j):
                lj = lj.sigma()
            lnext = lj
            for _ in range(fam.a):
                lnext = lnext.sigma()
            c = a_hat * lj
            cp = a_hat * lnext
        pair_terms.append((EisensteinElement.from_zq(ctx, c.coords),
                           EisensteinElement.from_zq(ctx, cp.coords),
                           u))
    cap = (fam.q + 1) * D
    kernel = level_kernel(ctx, pair_terms, cap, step=fam.q)
    basis = support_cone(fam).lattice_points(D)
    return operator_from_kernel(ctx, kernel, fam.q, basis, D, fam.a)


def chain_operator(fam: LaurentFamily, point: ClosedPoint, N: int,
                   D: int) -> TruncOperator:
    """Composition of the d level factors, highest twist applied last."""
    m = fam.a * point.degree
    ops = [level_operator(fam, point, j, N, D) for j in range(point.degree)]
    rows = ops[0].rows
    for op in ops[1:]:
        rows = mat_mul(op.ctx, op.rows, rows)
    ctx = ops[0].ctx
    rows = _scale_rows(ctx, rows, constant_character(fam, point, ctx))
    return TruncOperator(ctx, m, ops[0].basis, rows, D)


# -- matrix helpers (dense, Eisenstein entries) ------------------------------


def mat_mul(ctx, A, B):
    n = len(A)
    zero = EisensteinElement.zero(ctx)
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(n):
            acc = zero
            for k in range(n):
                a = Ai[k]
                if not a.is_zero_mod(a.prec_pi):
                    acc = acc + a * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_trace(ctx, A):
    acc = EisensteinElement.zero(ctx)
    for i in range(len(A)):
        acc = acc + A[i][i]
    return acc


def power_traces(op: TruncOperator, count: int):
    """tr(alpha), tr(alpha^2), ..., tr(alpha^count)."""
    out = []
    cur = op.rows
    out.append(mat_trace(op.ctx, cur))
    for _ in range(1, count):
        cur = mat_mul(op.ctx, cur, op.rows)
        out.append(mat_trace(op.ctx, cur))
    return out


def fredholm_coeffs(op: TruncOperator, k_max: int):
    """det(1 - alpha T) mod T^(k_max+1) via traces and Newton's identities
    for k < p, principal minors beyond that (division-free)."""
    ctx = op.ctx
    p = ctx.p
    coeffs = [EisensteinElement.one(ctx)]
    traces = power_traces(op, min(k_max, max(1, p - 1)))
    es = [EisensteinElement.one(ctx)]  # elementary symmetric of eigenvalues
    for k in range(1, k_max + 1):
        if k < p:
            acc = EisensteinElement.zero(ctx)
            for i in range(1, k + 1):
                sgn = (-1) ** (i - 1)
                term = es[k - i] * traces[i - 1]
                acc = acc + (term if sgn > 0 else -term)
            inv_k = pow(k, -1, ctx.pmod)
            es.append(acc.mul_int(inv_k))
        else:
            es.append(_minor_sum(op, k))
        c = es[k]
        coeffs.append(c if k % 2 == 0 else -c)
    return coeffs


def _minor_sum(op: TruncOperator, k: int):
    import itertools
    ctx = op.ctx
    acc = EisensteinElement.zero(ctx)
    for idx in itertools.combinations(range(op.dim), k):
        acc = acc + _small_det(ctx, [[op.rows[i][j] for j in idx] for i in idx])
    return acc


def _small_det(ctx, M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    acc = EisensteinElement.zero(ctx)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _small_det(ctx, minor)
        acc = acc + (term if j % 2 == 0 else -term)
    return acc


# -- trace formula and delta operator ----------------------------------------


def verify_trace_formula(fam: LaurentFamily, point: ClosedPoint, N: int,
                         ms=(1, 2), D: int | None = None):
    """(Q^m - 1)^n tr(alpha^m) must match the exact sum S_m mod p^N.

    Returns the list of pi-valuations of the differences (capped at working
    precision); the caller asserts against the expected floor.
    """
    op = fiber_operator(fam, point, N, D)
    ctx = op.ctx
    Q = fam.q ** point.degree
    traces = power_traces(op, max(ms))
    out = []
    for m in ms:
        factor = EisensteinElement.from_int(ctx, Q ** m - 1) ** fam.n
        lhs = factor * traces[m - 1]
        rhs = zeta_p_embed(ctx, exp_sum(fam, point, m).coords)
        out.append((lhs - rhs).ord_pi())
    return out


def delta_series(ctx, coeffs, Q: int, times: int = 1):
    """Apply g(T) -> g(T)/g(QT) `times` times, mod T^len(coeffs)."""
    cur = list(coeffs)
    for _ in range(times):
        scaled = [cur[j] * EisensteinElement.from_int(ctx, Q) ** j
                  for j in range(len(cur))]
        out = [EisensteinElement.one(ctx)]
        for j in range(1, len(cur)):
            acc = cur[j]
            for i in range(1, j + 1):
                acc = acc - scaled[i] * out[j - i]
            out.append(acc)
        cur = out
    return cur


# -- unit root by ratio stabilization ----------------------------------------


@dataclass
class RatioCertificate:
    """Stabilization record: ord_pi of consecutive ratio differences."""

    ratios: list
    gaps: list  # ord_pi(r_(i+1) - r_i)

    def stable_prec(self) -> int:
        return self.gaps[-1] if self.gaps else 0

    def monotone(self) -> bool:
        return all(b >= a for a, b in zip(self.gaps, self.gaps[1:]))


def unit_root_by_ratios(op: TruncOperator, iters: int | None = None,
                        use_trace: bool = False):
    """Unit eigenvalue via stabilizing ratios of iterates.

    Column mode iterates v -> alpha v and takes successive coordinate-0
    ratios; trace mode uses tr(alpha^(m+1))/tr(alpha^m).  Both converge at
    the spectral gap.  Returns (value, certificate).
    """
    ctx = op.ctx
    prec_pi = (ctx.p - 1) * ctx.prec
    if iters is None:
        iters = prec_pi + 4
    ratios = []
    if use_trace:
        traces = power_traces(op, iters + 1)
        for i in range(iters):
            ratios.append(traces[i + 1] * traces[i].inv())
    else:
        zero_idx = op.basis.index((0,) * len(op.basis[0]))
        v = [EisensteinElement.one(ctx) if i == zero_idx
             else EisensteinElement.zero(ctx) for i in range(op.dim)]
        prev = v[zero_idx]
        for _ in range(iters):
            v = _mat_vec(ctx, op.rows, v)
            curz = v[zero_idx]
            ratios.append(curz * prev.inv())
            prev = curz
    gaps = []
    for a, b in zip(ratios, ratios[1:]):
        gaps.append((b - a).ord_pi())
        if gaps[-1] >= prec_pi:
            break
    value = ratios[len(gaps)] if gaps else ratios[-1]
    return value, RatioCertificate(ratios[:len(gaps) + 1], gaps)


def _mat_vec(ctx, A, v):
    out = []
    for row in A:
        acc = EisensteinElement.zero(ctx)
        for a, x in zip(row, v):
            if not a.is_zero_mod(a.prec_pi):
                acc = acc + a * x
        out.append(acc)
    return out


def det_unit_root_check(ctx, det_coeffs, value, floor: int) -> bool:
    """The extracted unit root must annihilate the truncated Fredholm
    determinant's reciprocal polynomial to the stated depth."""
    K = len(det_coeffs) - 1
    acc = EisensteinElement.zero(ctx)
    for k, c in enumerate(det_coeffs):
        acc = acc + c * value ** (K - k)
    return acc.is_zero_mod(floor)


def fiber_unit_root_padic(fam: LaurentFamily, point: ClosedPoint, N: int,
                          D: int | None = None, det_floor: int | None = None):
    """Unit root of the fiber operator with a stabilization certificate.

    Cross-checks the ratio-extracted value against the Fredholm determinant;
    raises if either certificate fails.
    """
    op = fiber_operator(fam, point, N, D)
    value, cert = unit_root_by_ratios(op)
    if not cert.monotone():
        raise ArithmeticError("ratio stabilization is not monotone")
    dets = fredholm_coeffs(op, 2)
    floor = det_floor if det_floor is not None else min(
        cert.stable_prec(), 2 * (op.ctx.p - 1))
    if not det_unit_root_check(op.ctx, dets, value, floor):
        raise ArithmeticError("unit root fails the determinant cross-check")
    return value, cert, op
