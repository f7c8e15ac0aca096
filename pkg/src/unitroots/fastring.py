"""Batched fiber sweeps on a flattened Eisenstein ring.

Computing the unit root of every fiber of a one-variable family, degree by
degree, runs the chain of level operators as numpy contractions.  Ring
elements flatten to int64 coordinate vectors (coordinate j*a + i holds the
t^i part of the pi^j component), whole degrees batch along the leading axis,
and the split-factor tables reduce to strided convolutions because the
coefficient pi^(i-(p-1)j)/((i-pj)! j!) separates into an i-part and a j-part.

Certificates mirror the scalar route: successive column ratios with their
valuation gaps, checked monotone, plus the constant-support character scalar
applied at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .counting import LaurentFamily, enumerate_closed_points
from .fiber import support_cone, truncation_weight
from .gf import gf_cache
from .padic import (EisensteinElement, FieldContext, PiRational,
                    make_field_context)


class FlatRing:
    """Coordinate arithmetic for O = Z_q[pi]/(pi^(p-1)+p) mod p^N."""

    def __init__(self, ctx: FieldContext):
        self.ctx = ctx
        self.p = ctx.p
        self.a = ctx.a
        self.X = (ctx.p - 1) * ctx.a
        self.pmod = ctx.pmod
        self.T = self._structure_tensor()
        self.sig = self._sigma_matrix()

    def _structure_tensor(self) -> np.ndarray:
        ctx, p, a, X = self.ctx, self.p, self.a, self.X
        T = np.zeros((X, X, X), dtype=np.int64)
        units = []
        for i in range(a):
            e = [0] * a
            e[i] = 1
            units.append(tuple(e))
        for j1 in range(p - 1):
            for i1 in range(a):
                for j2 in range(p - 1):
                    for i2 in range(a):
                        prod = ctx.zq_mul(units[i1], units[i2])
                        j3, mult = j1 + j2, 1
                        if j3 >= p - 1:
                            j3, mult = j3 - (p - 1), -p
                        for l, c in enumerate(prod):
                            T[j1 * a + i1, j2 * a + i2, j3 * a + l] = (
                                mult * c) % self.pmod
        return T

    def _sigma_matrix(self) -> np.ndarray:
        # sigma fixes pi and acts Z_p-linearly on each component
        ctx, p, a, X = self.ctx, self.p, self.a, self.X
        S = np.zeros((X, X), dtype=np.int64)
        for i in range(a):
            e = [0] * a
            e[i] = 1
            img = ctx.zq_sigma(tuple(e))
            for j in range(p - 1):
                for l, c in enumerate(img):
                    S[j * a + l, j * a + i] = c
        return S

    def sigma_power(self, e: int) -> np.ndarray:
        out = np.eye(self.X, dtype=np.int64)
        for _ in range(e):
            out = (self.sig @ out) % self.pmod
        return out

    # -- element conversion ------------------------------------------------

    def from_eis(self, e: EisensteinElement) -> np.ndarray:
        out = np.zeros(self.X, dtype=np.int64)
        for j, comp in enumerate(e.comps):
            out[j * self.a:(j + 1) * self.a] = comp
        return out

    def to_eis(self, arr: np.ndarray) -> EisensteinElement:
        a = self.a
        comps = [tuple(int(c) for c in arr[j * a:(j + 1) * a])
                 for j in range(self.p - 1)]
        return EisensteinElement(self.ctx, comps)

    def one(self, shape) -> np.ndarray:
        out = np.zeros(tuple(shape) + (self.X,), dtype=np.int64)
        out[..., 0] = 1
        return out

    # -- batched operations ------------------------------------------------

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return np.einsum('...x,...y,xyz->...z', A, B, self.T,
                         optimize=True) % self.pmod

    def apply_sigma(self, A: np.ndarray, mat=None) -> np.ndarray:
        S = self.sig if mat is None else mat
        return (A @ S.T) % self.pmod

    def pow_table(self, c: np.ndarray, e_max: int) -> np.ndarray:
        """[f, e_max+1, X] with entry e = c^e."""
        f = c.shape[0]
        out = np.empty((f, e_max + 1, self.X), dtype=np.int64)
        out[:, 0] = self.one((f,))
        for e in range(1, e_max + 1):
            out[:, e] = self.mul(out[:, e - 1], c)
        return out

    def teichmuller(self, K, res_coords: np.ndarray) -> np.ndarray:
        """Batched Teichmuller lift of [f, a] residue coordinate rows."""
        f = res_coords.shape[0]
        y = np.zeros((f, self.X), dtype=np.int64)
        y[:, :self.a] = res_coords % self.p
        steps = -(-(self.ctx.prec - 1) // self.a) + 1
        for _ in range(steps):
            for _ in range(self.a):  # y <- y^p, a times
                sq = self.mul(y, y)
                y = self.mul(sq, y) if self.p == 3 else self._pow_small(y, sq)
        return y

    def _pow_small(self, y, sq):
        # y^p by square-and-multiply for p != 3
        acc = self.one(y.shape[:-1])
        base, e = y, self.p
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return acc

    def inv(self, A: np.ndarray, K) -> np.ndarray:
        """Batched inverse of units, Newton from the residue-field inverse."""
        p, a = self.p, self.a
        res = A[:, :a] % p
        enc = res @ (p ** np.arange(a, dtype=np.int64))
        logs = K.log_arr[enc]
        if np.any(logs < 0):
            raise ZeroDivisionError("non-unit in batched inverse")
        z = np.zeros_like(A)
        z[:, :a] = K.pow_table[(-logs) % (K.q - 1)]
        two = 2 % self.pmod
        iters = max(1, math.ceil(math.log2((p - 1) * self.ctx.prec))) + 1
        for _ in range(iters):
            az = self.mul(A, z)
            az = (-az) % self.pmod
            az[..., 0] = (az[..., 0] + two) % self.pmod
            z = self.mul(z, az)
        return z

    def ord_pi(self, A: np.ndarray) -> np.ndarray:
        """Batched pi-valuation, capped at (p-1)*prec."""
        p, a, prec = self.p, self.a, self.ctx.prec
        cap = (p - 1) * prec
        coords = A.reshape(A.shape[:-1] + (p - 1, a))
        ordp = np.full(coords.shape, prec, dtype=np.int64)
        rem = coords.copy()
        for v in range(prec):
            nz = rem % p != 0
            ordp = np.where(nz & (ordp == prec), v, ordp)
            rem //= p
        comp_ord = ordp.min(axis=-1)  # [.., p-1]
        j = np.arange(p - 1, dtype=np.int64)
        val = (p - 1) * comp_ord + j
        return np.minimum(val.min(axis=-1), cap)


def _factor_constants(ring: FlatRing, e_max: int, j_max: int):
    """Flat embeddings of pi^e/e! and (-1)^j pi^j/j!."""
    ctx = ring.ctx
    A = np.empty((e_max + 1, ring.X), dtype=np.int64)
    B = np.empty((j_max + 1, ring.X), dtype=np.int64)
    for e in range(e_max + 1):
        r = PiRational.from_pi_power(ctx.p, e, Fraction(1, math.factorial(e)))
        A[e] = ring.from_eis(r.to_eis(ctx))
    for j in range(j_max + 1):
        r = PiRational.from_pi_power(ctx.p, j,
                                     Fraction((-1) ** j, math.factorial(j)))
        B[j] = ring.from_eis(r.to_eis(ctx))
    return A, B


def _elementwise_table_mul(ring: FlatRing, table: np.ndarray,
                           consts: np.ndarray) -> np.ndarray:
    """table[f, e, X] * consts[e, X] pointwise in e."""
    CT = np.einsum('ex,xyz->eyz', consts, ring.T, optimize=True) % ring.pmod
    return np.einsum('fey,eyz->fez', table, CT, optimize=True) % ring.pmod


def _strided_conv(ring: FlatRing, U: np.ndarray, V: np.ndarray,
                  stride: int) -> np.ndarray:
    """F[f, i] = sum_j U[f, i - stride*j] . V[f, j] on the i-grid of U."""
    f, L, X = U.shape
    out = np.zeros_like(U)
    for j in range(V.shape[1]):
        base = stride * j
        if base >= L:
            break
        VT = np.einsum('fx,xyz->fyz', V[:, j], ring.T,
                       optimize=True) % ring.pmod
        out[:, base:] = (out[:, base:] + np.einsum(
            'fey,fyz->fez', U[:, :L - base], VT, optimize=True)) % ring.pmod
    return out


@dataclass
class _Window:
    """Series slab on a contiguous exponent window."""

    lo: int
    data: np.ndarray  # [f, length, X]

    @property
    def hi(self) -> int:
        return self.lo + self.data.shape[1] - 1


def _conv_windows(ring: FlatRing, A: _Window, B: _Window,
                  wlo: int, whi: int) -> _Window:
    f, LA, X = A.data.shape
    out = np.zeros((f, whi - wlo + 1, X), dtype=np.int64)
    for k in range(B.data.shape[1]):
        base = A.lo + B.lo + k
        e0 = max(0, wlo - base)
        e1 = min(LA - 1, whi - base)
        if e0 > e1:
            continue
        BT = np.einsum('fx,xyz->fyz', B.data[:, k], ring.T,
                       optimize=True) % ring.pmod
        seg = np.einsum('fey,fyz->fez', A.data[:, e0:e1 + 1], BT,
                        optimize=True)
        pos = base + e0 - wlo
        out[:, pos:pos + (e1 - e0 + 1)] = (
            out[:, pos:pos + (e1 - e0 + 1)] + seg) % ring.pmod
    return _Window(wlo, out)


def _to_exponent_grid(F: np.ndarray, u: int) -> _Window:
    """Place the i-grid table on exponent w = u*i."""
    f, L, X = F.shape
    if u == 1:
        return _Window(0, F)
    if u == -1:
        return _Window(-(L - 1), F[:, ::-1])
    s = abs(u)
    out = np.zeros((f, s * (L - 1) + 1, X), dtype=np.int64)
    out[:, ::s] = F
    if u > 0:
        return _Window(0, out)
    return _Window(-s * (L - 1), out[:, ::-1])


@dataclass
class SweepResult:
    """Unit roots of every degree-d fiber with stabilization data."""

    family: LaurentFamily
    degree: int
    points: list
    values: list  # EisensteinElement per fiber
    gaps: list    # per-fiber list of ord_pi(r_(s+1) - r_s)
    char_exponents: np.ndarray

    def certified(self, floor: int) -> bool:
        for g in self.gaps:
            if not g or g[-1] < floor:
                return False
            if any(b < a for a, b in zip(g, g[1:])):
                return False
        return True


def sweep_unit_roots(fam: LaurentFamily, N: int, degree: int,
                     D: int | None = None, pass_cap: int = 12,
                     points=None) -> SweepResult:
    """Unit roots of all degree-d fibers via the batched level chain.

    Levels step by q = p^a so the pair coefficients stay sigma^a-compatible
    and every level kernel decays.  Only one fiber variable is supported;
    the parameter side is arbitrary.
    """
    if fam.n != 1:
        raise ValueError("batched sweep handles one fiber variable")
    p, q = fam.p, fam.q
    m = fam.a * degree
    if D is None:
        D = truncation_weight(p, fam.a, N, fam.omega1 + fam.omega2)
    ctx = make_field_context(p, m, N)
    ring = FlatRing(ctx)
    K = gf_cache(p, m)
    if points is None:
        points = enumerate_closed_points(p, fam.a, fam.s, degree)[degree]
    if not points:
        raise ValueError("no closed points at this degree")
    f = len(points)
    Qm1 = K.q - 1
    logs = np.array([pt.logs for pt in points], dtype=np.int64)  # [f, s]

    cap = (q + 1) * D
    basis = np.array([v[0] for v in support_cone(fam).lattice_points(D)],
                     dtype=np.int64)
    dim = basis.size
    origin = int(np.nonzero(basis == 0)[0][0])

    # per-term Teichmuller data: a_hat is fiber-independent, the lam part
    # batches over fibers; chain levels sigma-shift the lam part only
    kernel_terms = []   # (a_pows [i+1, X], lam0 [f, X], u, i_max, j_max)
    char_exp = np.zeros(f, dtype=np.int64)
    for c, r, u in fam.terms:
        a_res = K.embed_from(fam.a, c)
        a_log = K.log(a_res)
        r_log = np.zeros(f, dtype=np.int64)
        for i, ri in enumerate(r):
            if ri:
                r_log = (r_log + ri * logs[:, i]) % Qm1
        if not any(u):
            c_log = (a_log + r_log) % Qm1
            char_exp = (char_exp + K.tr_pow[c_log]) % p
            continue
        uu = u[0]
        i_max = cap // abs(uu)
        j_max = i_max // q
        a_hat = ring.from_eis(EisensteinElement.from_zq(
            ctx, _teich_scalar(ctx, K, a_res)))
        a_pows = np.empty((i_max + 1, ring.X), dtype=np.int64)
        a_pows[0] = ring.one(())
        for e in range(1, i_max + 1):
            a_pows[e] = ring.mul(a_pows[e - 1], a_hat)
        lam0 = ring.teichmuller(K, K.pow_table[r_log])
        kernel_terms.append((a_pows, lam0, uu, i_max, j_max))

    i_cap = max((t[3] for t in kernel_terms), default=0)
    consts_A, consts_B = _factor_constants(ring, i_cap, i_cap // q)
    sig_a = ring.sigma_power(fam.a)

    # per-level kernel windows B_w; level j uses lam^(q^j r)
    wlo = int(min(q * basis.min() - basis.max(), 0))
    whi = int(max(q * basis.max() - basis.min(), 0))
    wlo, whi = max(wlo, -cap), min(whi, cap)
    levels = []
    lam_parts = [lp for _, lp, _, _, _ in kernel_terms]
    for j in range(degree):
        window = None
        for t_idx, (a_pows, _, uu, i_max, j_max) in enumerate(kernel_terms):
            lam_j = lam_parts[t_idx]
            lam_pows = ring.pow_table(lam_j, i_max)
            c_pows = _elementwise_table_mul(ring, lam_pows, a_pows)
            lam_next = ring.apply_sigma(lam_j, sig_a)
            lam_parts[t_idx] = lam_next
            lam_pows_next = ring.apply_sigma(lam_pows[:, :j_max + 1], sig_a)
            cp_pows = _elementwise_table_mul(ring, lam_pows_next,
                                             a_pows[:j_max + 1])
            U = _elementwise_table_mul(ring, c_pows, consts_A[:i_max + 1])
            V = _elementwise_table_mul(ring, cp_pows, consts_B[:j_max + 1])
            F = _strided_conv(ring, U, V, q)
            Fw = _to_exponent_grid(F, uu)
            if window is None:
                lo = max(Fw.lo, wlo)
                hi = min(Fw.hi, whi)
                data = Fw.data[:, lo - Fw.lo:hi - Fw.lo + 1]
                window = _Window(lo, data)
            else:
                window = _conv_windows(ring, window, Fw, wlo, whi)
        levels.append(window)

    # gather step: entry(v, u) = B(q v - u)
    W = q * basis[:, None] - basis[None, :]  # [dim, dim]
    gather = []
    for win in levels:
        idx = W - win.lo
        valid = (W >= win.lo) & (W <= win.hi)
        idx = np.where(valid, idx, 0)
        gather.append((idx, valid))

    prec_pi = (p - 1) * N
    g = np.zeros((f, dim, ring.X), dtype=np.int64)
    g[:, origin, 0] = 1
    prev_z = g[:, origin].copy()
    prev_ratio = None
    gap_hist = []
    ratio = None
    for _ in range(pass_cap):
        for win, (idx, valid) in zip(levels, gather):
            Bmat = win.data[:, idx]             # [f, dim, dim, X]
            Bmat = Bmat * valid[None, :, :, None]
            gT = np.einsum('fuy,xyz->fuxz', g, ring.T,
                           optimize=True) % ring.pmod
            g = np.einsum('fvux,fuxz->fvz', Bmat, gT,
                          optimize=True) % ring.pmod
        z = g[:, origin]
        ratio = ring.mul(z, ring.inv(prev_z, K))
        prev_z = z.copy()
        if prev_ratio is not None:
            diff = (ratio - prev_ratio) % ring.pmod
            gap_hist.append(ring.ord_pi(diff))
            if len(gap_hist) >= 2 and np.all(gap_hist[-1] >= prec_pi):
                break
        prev_ratio = ratio

    zeta_pows = _zeta_power_table(ring)
    values_flat = ring.mul(ratio, zeta_pows[char_exp])
    values = [ring.to_eis(values_flat[i]) for i in range(f)]
    gaps = [[int(h[i]) for h in gap_hist] for i in range(f)]
    return SweepResult(fam, degree, list(points), values, gaps, char_exp)


def _teich_scalar(ctx, K, res):
    from .padic import teichmuller
    return teichmuller(ctx, res).coords


def _zeta_power_table(ring: FlatRing) -> np.ndarray:
    from .padic import zeta_p_embed
    ctx = ring.ctx
    out = np.empty((ctx.p, ring.X), dtype=np.int64)
    out[0] = ring.one(())
    z = zeta_p_embed(ctx)
    cur = z
    for e in range(1, ctx.p):
        out[e] = ring.from_eis(cur)
        cur = cur * z
    return out


def sweep_all(fam: LaurentFamily, N: int, d_max: int,
              D: int | None = None) -> dict:
    """SweepResult per degree 1..d_max."""
    return {d: sweep_unit_roots(fam, N, d, D) for d in range(1, d_max + 1)}
