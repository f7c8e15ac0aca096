"""Finite fields F_{p^k} with discrete-log tables and trace vectors.

Every field is F_p[t]/(g_k) for the canonical irreducible g_k (shared with the
p-adic side, which lifts the same polynomial), so residue coordinates can move
between the two worlds without translation.  Elements are handled as indices
into the power table of a distinguished multiplicative generator; additive
structure comes from the coordinate rows.  All tables are numpy arrays sized
for fields up to a few hundred thousand elements, which covers every sum the
desk-scale families need.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .padic import canonical_irreducible


def _factorize(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _poly_mul_mod(x, y, g, p):
    k = len(g) - 1
    conv = [0] * (2 * k - 1)
    for i, u in enumerate(x):
        if u:
            for j, v in enumerate(y):
                conv[i + j] = (conv[i + j] + u * v) % p
    for i in range(2 * k - 2, k - 1, -1):
        c = conv[i]
        if c:
            for j in range(k):
                conv[i - k + j] = (conv[i - k + j] - c * g[j]) % p
    return tuple(conv[:k])


def _poly_pow_mod(x, e, g, p):
    k = len(g) - 1
    r = (1,) + (0,) * (k - 1)
    b = tuple(x)
    while e:
        if e & 1:
            r = _poly_mul_mod(r, b, g, p)
        b = _poly_mul_mod(b, b, g, p)
        e >>= 1
    return r


class GF:
    """F_{p^k} with generator power table, log table, and absolute trace."""

    def __init__(self, p: int, k: int):
        self.p = p
        self.k = k
        self.q = p ** k
        self.g = canonical_irreducible(p, k)
        self._enc_weights = np.array([p ** i for i in range(k)], dtype=np.int64)
        self.gen = self._find_generator()
        self.pow_table = self._build_pow_table()
        enc = self.pow_table @ self._enc_weights
        self.log_arr = np.full(self.q, -1, dtype=np.int64)
        self.log_arr[enc] = np.arange(self.q - 1, dtype=np.int64)
        if int((self.log_arr >= 0).sum()) != self.q - 1:
            raise RuntimeError("generator power table is not a bijection")
        self.trace_vec = self._trace_vector()
        self.tr_pow = (self.pow_table @ self.trace_vec) % p  # Tr(gen^j)
        self._embed_logs: dict[int, int] = {}

    # -- construction ------------------------------------------------------

    def _find_generator(self):
        """Smallest element by coordinate encoding with full multiplicative order."""
        primes = _factorize(self.q - 1)
        cofactors = [(self.q - 1) // ell for ell in primes]
        one = (1,) + (0,) * (self.k - 1)
        for code in range(1, self.q):
            x = tuple((code // self.p ** i) % self.p for i in range(self.k))
            if all(_poly_pow_mod(x, c, self.g, self.p) != one for c in cofactors):
                return x
        raise RuntimeError("no generator found")

    def _build_pow_table(self):
        p, k, q = self.p, self.k, self.q
        # multiplication by gen as a k x k matrix over F_p
        cols = []
        for i in range(k):
            ti = tuple(1 if j == i else 0 for j in range(k))
            cols.append(_poly_mul_mod(self.gen, ti, self.g, p))
        M = np.array(cols, dtype=np.int64).T % p
        table = np.zeros((q - 1, k), dtype=np.int64)
        table[0, 0] = 1
        block = min(q - 1, 1024)
        for j in range(1, block):
            table[j] = (M @ table[j - 1]) % p
        if block < q - 1:
            MB = np.eye(k, dtype=np.int64)
            e = block
            B = M.copy()
            while e:
                if e & 1:
                    MB = (MB @ B) % p
                B = (B @ B) % p
                e >>= 1
            # MB advances a power row by `block`; rows need the transpose
            done = block
            while done < q - 1:
                step = min(block, q - 1 - done)
                table[done:done + step] = (table[done - block:done - block + step] @ MB.T) % p
                done += step
        return table

    def _trace_vector(self):
        """Tr(t^j) for j < k via Newton power sums of the modulus."""
        p, k = self.p, self.k
        c = self.g  # c[0..k], monic
        s = [k % p]
        for m in range(1, k):
            acc = (-m * c[k - m]) % p
            for i in range(1, m):
                acc = (acc - c[k - i] * s[m - i]) % p
            s.append(acc % p)
        return np.array(s, dtype=np.int64)

    # -- scalar element helpers (coords are tuples of ints mod p) ---------

    def encode(self, coords) -> int:
        return int(sum(c % self.p * self.p ** i for i, c in enumerate(coords)))

    def decode(self, code: int):
        return tuple((code // self.p ** i) % self.p for i in range(self.k))

    def log(self, coords) -> int:
        """Discrete log of a nonzero element."""
        j = int(self.log_arr[self.encode(coords)])
        if j < 0:
            raise ZeroDivisionError("log of zero")
        return j

    def exp(self, j: int):
        return tuple(int(v) for v in self.pow_table[j % (self.q - 1)])

    def add(self, x, y):
        return tuple((u + v) % self.p for u, v in zip(x, y))

    def mul(self, x, y):
        return _poly_mul_mod(x, y, self.g, self.p)

    def pow(self, x, e: int):
        if all(c % self.p == 0 for c in x):
            if e <= 0:
                raise ZeroDivisionError("0^e for e <= 0")
            return x
        return self.exp(self.log(x) * e)

    def trace(self, x) -> int:
        """Absolute trace to F_p."""
        return int(sum(c * int(t) for c, t in zip(x, self.trace_vec)) % self.p)

    # -- subfield embedding ------------------------------------------------

    def embed_log_from(self, sub_k: int) -> int:
        """log of the chosen root of the degree-sub_k canonical modulus here.

        The subfield embedding sends the subfield's residue generator t to the
        root with the smallest log; candidates live in the (p^sub_k - 1)-torsion.
        """
        cached = self._embed_logs.get(sub_k)
        if cached is not None:
            return cached
        if self.k % sub_k != 0:
            raise ValueError("not a subfield")
        qs = self.p ** sub_k
        step = (self.q - 1) // (qs - 1)
        gsub = canonical_irreducible(self.p, sub_k)
        best = None
        for i in range(qs - 1):
            j = i * step
            acc = (gsub[0] % self.p,) + (0,) * (self.k - 1)
            # evaluate the subfield modulus at gen^j
            for m in range(1, len(gsub)):
                if gsub[m]:
                    xm = self.exp((j * m) % (self.q - 1))
                    acc = tuple((u + gsub[m] * v) % self.p for u, v in zip(acc, xm))
            if all(c == 0 for c in acc):
                best = j if best is None else min(best, j)
        if best is None:
            raise RuntimeError("subfield modulus has no root")
        self._embed_logs[sub_k] = best
        return best

    def embed_from(self, sub_k: int, coords):
        """Canonical embedding GF(p, sub_k) -> this field on coordinates."""
        if sub_k == self.k:
            return tuple(c % self.p for c in coords)
        if sub_k == 1:
            # prime-field modulus is t itself; constants embed as constants
            return (coords[0] % self.p,) + (0,) * (self.k - 1)
        root_log = self.embed_log_from(sub_k)
        acc = (coords[0] % self.p,) + (0,) * (self.k - 1)
        for m in range(1, len(coords)):
            if coords[m] % self.p:
                xm = self.exp((root_log * m) % (self.q - 1))
                acc = tuple((u + coords[m] * v) % self.p for u, v in zip(acc, xm))
        return acc


@lru_cache(maxsize=None)
def gf_cache(p: int, k: int) -> GF:
    return GF(p, k)
