"""Rotation-invariant moment generating function in log space.

``phi_d(z) = E_{v ~ S^{d-1}} exp(z v_1)`` equals ``cosh(z)`` for ``d = 1`` and
``Gamma(a + 1) (2/z)^a I_a(z)`` with ``a = (d - 2)/2`` otherwise, where
``I_a`` is the modified Bessel function of the first kind.  ``phi_d`` grows
like ``e^z`` and overflows doubles near ``z = 700``, so every public value
here is a logarithm.

The engine sums the power series of ``phi_d`` directly around its largest
term and switches to the large-argument (Hankel) expansion of ``I_a`` once
the first neglected correction is below ``1e-15``.  Two independent oracles
(a Poisson-integral quadrature and a Monte Carlo sphere average) check it.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numba as nb
import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .exceptions import DomainError, SearchRangeError

HANKEL_TERMS = 4
HANKEL_MIN_Z = 30.0
HANKEL_TRUNCATION = 1e-15
_LOG2 = math.log(2.0)
_LOG_2PI = math.log(2.0 * math.pi)


@nb.njit(cache=True)
def _log_series(a, z, normalized=False):
    """log sum_k (z/2)^(2k) / (k! Gamma(k + a + 1)), summed outward from the peak term.

    With ``normalized`` the sum is multiplied by ``Gamma(a + 1)``, exactly so
    when the peak is the leading term.
    """
    w = 0.25 * z * z
    kp = 0.5 * (-(a + 2.0) + math.sqrt(a * a + 4.0 * w))
    k0 = max(0, int(math.ceil(kp)))
    log_peak = 0.0
    if k0 > 0 or not normalized:
        log_peak = -math.lgamma(k0 + 1.0) - math.lgamma(k0 + a + 1.0)
        if normalized:
            log_peak += math.lgamma(a + 1.0)
    if k0 > 0:
        log_peak += 2.0 * k0 * math.log(0.5 * z)
    total = 1.0
    term = 1.0
    k = k0
    while k > 0:
        term *= k * (k + a) / w
        total += term
        k -= 1
        if term < 1e-18 * total:
            break
    term = 1.0
    k = k0
    while True:
        ratio = w / ((k + 1.0) * (k + a + 1.0))
        term *= ratio
        total += term
        k += 1
        if ratio < 1.0 and term * ratio / (1.0 - ratio) < 1e-18 * total:
            break
    return log_peak + math.log(total)


@nb.njit(cache=True)
def _hankel_coeffs(a):
    mu = 4.0 * a * a
    c = np.empty(HANKEL_TERMS + 2)
    c[0] = 1.0
    for k in range(1, HANKEL_TERMS + 2):
        c[k] = c[k - 1] * (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0)
    return c


@nb.njit(cache=True)
def _hankel_ok(a, z):
    if z < HANKEL_MIN_Z:
        return False
    c = _hankel_coeffs(a)
    return abs(c[HANKEL_TERMS + 1]) / z ** (HANKEL_TERMS + 1) <= HANKEL_TRUNCATION


@nb.njit(cache=True)
def _hankel_poly(a, z):
    c = _hankel_coeffs(a)
    s = 0.0
    sign = 1.0
    for k in range(HANKEL_TERMS + 1):
        s += sign * c[k] / z**k
        sign = -sign
    return s


@nb.njit(cache=True)
def _log_phi_scalar(d, z):
    if z == 0.0:
        return 0.0
    if d == 1:
        return z + math.log1p(math.exp(-2.0 * z)) - _LOG2
    a = 0.5 * (d - 2)
    if _hankel_ok(a, z):
        log_iv = z - 0.5 * (_LOG_2PI + math.log(z)) + math.log(_hankel_poly(a, z))
        return math.lgamma(a + 1.0) + a * math.log(2.0 / z) + log_iv
    return _log_series(a, z, True)


@nb.njit(cache=True)
def _log_iv_scalar(a, z):
    if _hankel_ok(a, z):
        return z - 0.5 * (_LOG_2PI + math.log(z)) + math.log(_hankel_poly(a, z))
    return a * (math.log(z) - _LOG2) + _log_series(a, z)


@nb.njit(cache=True)
def _log_derivative_scalar(d, z):
    if d == 1:
        return math.tanh(z)
    a = 0.5 * (d - 2)
    if _hankel_ok(a + 1.0, z) and _hankel_ok(a, z):
        return _hankel_poly(a + 1.0, z) / _hankel_poly(a, z)
    # (z/2)^(a+1) / (z/2)^a cancels outside the logs, which keeps tiny z finite
    return 0.5 * z * math.exp(_log_series(a + 1.0, z) - _log_series(a, z))


@nb.njit(cache=True)
def _map_log_phi(d, z, out):
    for i in range(z.size):
        out[i] = _log_phi_scalar(d, z[i])


@nb.njit(cache=True)
def _map_log_iv(a, z, out):
    for i in range(z.size):
        out[i] = _log_iv_scalar(a, z[i])


@nb.njit(cache=True)
def _map_log_derivative(d, z, out):
    for i in range(z.size):
        out[i] = _log_derivative_scalar(d, z[i]) if z[i] > 0 else 0.0


def _check_dim(d):
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    return int(d)


def _apply(kernel, d, z):
    arr = np.asarray(z, dtype=float)
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = np.empty_like(flat)
    kernel(d, flat, out)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def log_phi(d, z):
    """``log phi_d(z)`` for ``z >= 0``; accepts scalars or arrays."""
    d = _check_dim(d)
    if np.any(np.asarray(z) < 0) or np.any(np.isnan(z)):
        raise DomainError("log_phi is defined for z >= 0")
    return _apply(_map_log_phi, d, z)


def log_bessel_i(order, z):
    """``log I_order(z)`` for ``order >= 0`` and ``z > 0``; accepts scalars or arrays."""
    if order < 0 or not np.all(np.asarray(z) > 0):
        raise DomainError("log_bessel_i needs order >= 0 and z > 0")
    return _apply(_map_log_iv, float(order), z)


def log_derivative(d, z):
    """``d/dz log phi_d(z)``, equal to ``I_{a+1}(z) / I_a(z)`` (``tanh`` when d=1)."""
    d = _check_dim(d)
    if np.any(np.asarray(z) <= 0):
        raise DomainError("log_derivative is defined for z > 0")
    return _apply(_map_log_derivative, d, z)


def big_phi_log(d, lam, x):
    """``log Phi_{d,lam}(x) = log phi_d(lam ||x||)`` over the last axis of ``x``."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    return log_phi(d, lam * np.linalg.norm(x, axis=-1))


def phi_quadrature_oracle(d, z):
    """``log phi_d(z)`` from the law of ``v_1`` on the sphere, by adaptive quadrature.

    Integrates ``exp(z (t - 1)) (1 - t^2)^(a - 1/2)`` on ``[-1, 1]`` with the
    endpoint singularities handled by QUADPACK's algebraic weight, then adds
    back ``z`` and the normalising constant ``Gamma(a+1) / (sqrt(pi) Gamma(a+1/2))``.
    """
    d = _check_dim(d)
    if d < 2:
        raise DomainError("quadrature oracle needs d >= 2; use cosh for d = 1")
    if z < 0:
        raise DomainError("z must be >= 0")
    a = 0.5 * (d - 2)
    e = a - 0.5
    log_norm = gammaln(a + 1.0) - 0.5 * math.log(math.pi) - gammaln(a + 0.5)
    if z == 0:
        val, _ = integrate.quad(lambda t: 1.0, -1.0, 1.0, weight="alg", wvar=(e, e),
                                epsabs=0.0, epsrel=1e-13)
        return log_norm + math.log(val)
    # the mass sits within ~1/z of t = 1 for large z; split there so QUADPACK sees it
    split = max(-1.0, 1.0 - min(1.0, 40.0 / z))
    total = 0.0
    pieces = [(-1.0, split), (split, 1.0)] if split > -1.0 else [(-1.0, 1.0)]
    for lo, hi in pieces:
        # weight (t - lo)^p (hi - t)^q; rebuild the missing factor of (1 - t^2)^e
        def f(t, lo=lo, hi=hi):
            g = math.exp(z * (t - 1.0))
            if lo > -1.0:
                g *= (1.0 + t) ** e
            if hi < 1.0:
                g *= (1.0 - t) ** e
            return g
        wl = e if lo == -1.0 else 0.0
        wh = e if hi == 1.0 else 0.0
        val, _ = integrate.quad(f, lo, hi, weight="alg", wvar=(wl, wh),
                                epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return log_norm + z + math.log(total)


def phi_mc_oracle(d, z, n=10**6, seed=0):
    """Monte Carlo ``(estimate, standard_error)`` of ``phi_d(z)`` from uniform sphere points."""
    d = _check_dim(d)
    if n < 1000:
        raise DomainError("phi_mc_oracle needs n >= 1000")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    v1 = g[:, 0] / np.linalg.norm(g, axis=1)
    vals = np.exp(z * v1)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def estimate_r0(d, rate=0.5, step=1e-3):
    """Smallest grid point ``r`` with ``log_derivative(d, z) >= rate`` for every grid ``z >= r``.

    Because the log-derivative increases in ``z``, this certifies
    ``phi_d(r + D) >= exp(rate D) phi_d(r)`` for all ``D > 0`` at grid resolution.
    A coarse pass over the whole range locates the crossing cell, which is
    then resolved at spacing ``step``.
    """
    d = _check_dim(d)
    if not 0 < rate < 1:
        raise DomainError("rate must lie in (0, 1)")
    # the threshold sits near 2d/3 for large d
    top = 40.0 * max(1.0, math.sqrt(d)) + d

    def first_good(grid):
        ld = np.empty_like(grid)
        _map_log_derivative(d, grid, ld)
        # suffix_ok[i] is True when every grid point from i onwards qualifies
        suffix_ok = np.flip(np.logical_and.accumulate(np.flip(ld >= rate)))
        return int(np.argmax(suffix_ok)) if suffix_ok[-1] else -1

    n_fine = int(round(top / step))
    coarse = np.arange(0, n_fine + 1, max(1, n_fine // 4096)) * step
    j = first_good(coarse)
    if j < 0:
        raise SearchRangeError(f"log-derivative never reaches {rate} on [0, {top:g}]")
    if j == 0:
        return 0.0
    lo = int(round(coarse[j - 1] / step))
    hi = int(round(coarse[j] / step))
    fine = np.arange(lo, hi + 1) * step
    return float(fine[first_good(fine)])


class ConvolutionCheck(NamedTuple):
    lhs_log: float
    rhs_log: float
    stderr_log: float = 0.0


def _chi_logpdf(rho, k):
    return ((k - 1) * math.log(rho) - 0.5 * rho * rho - (0.5 * k - 1) * _LOG2
            - math.lgamma(0.5 * k))


def convolution_identity_check(d, lam, x, sigma, method="quadrature", n=10**6, seed=0):
    """Both sides of ``E[Phi(x + Z)] = exp(lam^2 sigma^2 / 2) Phi(x)``, ``Z ~ N(0, sigma^2 I)``.

    ``quadrature`` writes ``x + Z`` in components along and across ``x`` (a
    normal and a chi variable of ``d - 1`` degrees of freedom) and integrates
    adaptively; ``monte_carlo`` averages over ``n`` Gaussian draws and reports
    a delta-method standard error for the log-mean.
    """
    d = _check_dim(d)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    x = np.asarray(x, dtype=float).reshape(d)
    rhs = 0.5 * lam * lam * sigma * sigma + float(big_phi_log(d, lam, x))
    r = float(np.linalg.norm(x))

    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        vals = big_phi_log(d, lam, x + sigma * rng.standard_normal((n, d)))
        lhs = float(logsumexp(vals) - math.log(n))
        w = np.exp(vals - vals.max())
        se = float(w.std(ddof=1) / (w.mean() * math.sqrt(n)))
        return ConvolutionCheck(lhs, rhs, se)
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")

    ls = lam * sigma
    shift = float(_log_phi_scalar(d, lam * r + ls * ls))
    u_lo, u_hi = ls - 12.0, ls + 12.0
    opts = dict(epsabs=0.0, epsrel=1e-11, limit=200)
    norm_u = -0.5 * math.log(2.0 * math.pi)

    if d == 1:
        def fu(u):
            return math.exp(_log_phi_scalar(1, abs(lam * (r + sigma * u))) - shift
                            + norm_u - 0.5 * u * u)
        val, _ = integrate.quad(fu, u_lo, u_hi, points=[-r / sigma], **opts)
        return ConvolutionCheck(shift + math.log(val), rhs)

    k = d - 1
    rho_hi = ls + math.sqrt(k) + 12.0

    def inner(u):
        a = r + sigma * u

        def frho(rho):
            s = lam * math.sqrt(a * a + (sigma * rho) ** 2)
            return math.exp(_log_phi_scalar(d, s) - shift + _chi_logpdf(rho, k))
        val, _ = integrate.quad(frho, 0.0, rho_hi, **opts)
        return val * math.exp(norm_u - 0.5 * u * u)

    val, _ = integrate.quad(inner, u_lo, u_hi, **opts)
    return ConvolutionCheck(shift + math.log(val), rhs)
