"""Counter-based Gaussian streams.

Each chain owns a Philox4x32-10 key derived from ``(seed, chain)`` with
SplitMix64.  The standard normal used for coordinate ``j`` at iteration
``t`` is a pure function of ``(key, t * dim + j)``: it is drawn by an exact
256-layer ziggurat whose k-th attempt reads Philox block
``(index_lo, index_hi, k, tag)``.  No generator state exists, so a chain's
noise does not depend on how chains are grouped, ordered or threaded.
"""

import math

import numba as nb
import numpy as np
from numba import int64, uint32, uint64

_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint32(0x9E3779B9)
_PHILOX_W1 = np.uint32(0xBB67AE85)
_LO32 = np.uint64(0xFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0

_ZIG_R = 3.6541528853610088
_ZIG_V = 0.00492867323399


def _ziggurat_tables(n=256):
    def f(x):
        return math.exp(-0.5 * x * x)

    x = np.zeros(n + 1)
    x[0] = _ZIG_V / f(_ZIG_R)
    x[1] = _ZIG_R
    for i in range(1, n - 1):
        x[i + 1] = math.sqrt(-2.0 * math.log(_ZIG_V / x[i] + f(x[i])))
    return x, x[1:] / x[:-1]


ZIG_X, ZIG_RATIO = _ziggurat_tables()


@nb.njit(inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    for _ in range(10):
        p0 = uint64(c0) * _PHILOX_M0
        p1 = uint64(c2) * _PHILOX_M1
        hi0 = uint32(p0 >> uint64(32))
        lo0 = uint32(p0 & _LO32)
        hi1 = uint32(p1 >> uint64(32))
        lo1 = uint32(p1 & _LO32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = uint32(k0 + _PHILOX_W0)
        k1 = uint32(k1 + _PHILOX_W1)
    return c0, c1, c2, c3


@nb.njit(inline="always")
def _u53(a, b):
    # 27 high bits of a, 26 high bits of b -> [0, 1)
    return float(int64(a >> uint32(5)) * 67108864 + int64(b >> uint32(6))) * _INV53


@nb.njit(inline="always")
def _wedge_uniform(r2, r3):
    return float((int64(r3) << 21) | int64(r2 >> uint32(11))) * _INV53


@nb.njit(inline="always")
def first_attempt(lo, hi, k0, k1):
    """Signed uniform and layer index of the ziggurat's first attempt."""
    r0, r1, r2, r3 = philox4x32(lo, hi, uint32(0), uint32(0), k0, k1)
    return 2.0 * _u53(r0, r1) - 1.0, int64(r2 & uint32(255))


@nb.njit(nogil=True, cache=True)
def normal_at(lo, hi, k0, k1, xt, ratio):
    """Standard normal for stream index ``(hi << 32) | lo`` under key ``(k0, k1)``."""
    attempt = uint32(0)
    while True:
        r0, r1, r2, r3 = philox4x32(lo, hi, attempt, uint32(0), k0, k1)
        attempt += uint32(1)
        u = 2.0 * _u53(r0, r1) - 1.0
        i = int64(r2 & uint32(255))
        if abs(u) < ratio[i]:
            return u * xt[i]
        if i == 0:
            # Marsaglia's exact tail beyond R
            while True:
                s0, s1, s2, s3 = philox4x32(lo, hi, attempt, uint32(1), k0, k1)
                attempt += uint32(1)
                e1 = -math.log(_u53(s0, s1) + 0.5 * _INV53) / _ZIG_R
                e2 = -math.log(_u53(s2, s3) + 0.5 * _INV53)
                if 2.0 * e2 > e1 * e1:
                    return _ZIG_R + e1 if u > 0 else -(_ZIG_R + e1)
        xx = u * xt[i]
        f0 = math.exp(-0.5 * (xt[i] * xt[i] - xx * xx))
        f1 = math.exp(-0.5 * (xt[i + 1] * xt[i + 1] - xx * xx))
        if f1 + _wedge_uniform(r2, r3) * (f0 - f1) < 1.0:
            return xx


def splitmix64(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def chain_keys(seed, chains):
    """Philox keys ``(k0, k1)`` for the given chain indices under a 64-bit seed."""
    base = splitmix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    idx = np.asarray(chains, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = splitmix64(base ^ splitmix64(idx))
    return (h & np.uint64(0xFFFFFFFF)).astype(np.uint32), (h >> np.uint64(32)).astype(np.uint32)


@nb.njit(nogil=True, cache=True)
def _fill_normals(k0, k1, start, dim, out, xt, ratio):
    n = k0.shape[0]
    for c in range(n):
        for j in range(dim):
            idx = start + j
            out[c, j] = normal_at(uint32(idx & 0xFFFFFFFF), uint32(idx >> 32),
                                  k0[c], k1[c], xt, ratio)


def stream_normals(seed, chains, step, dim):
    """Noise vectors used by the given chains at iteration ``step``, shape ``(n, dim)``."""
    k0, k1 = chain_keys(seed, chains)
    out = np.empty((k0.size, dim))
    _fill_normals(k0, k1, np.int64(step) * dim, dim, out, ZIG_X, ZIG_RATIO)
    return out
