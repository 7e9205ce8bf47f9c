"""Theoretical constants and tail envelopes for the stationary law.

Strongly convex potentials give a sub-Gaussian envelope driven by the
contraction coefficient of the gradient map; merely convex potentials with
linear growth give a sub-exponential envelope whose constants are written out
explicitly.  All functions are pure.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, EnvelopeUnavailableError


class EnvelopeKind(str, enum.Enum):
    SUBGAUSSIAN = "subgaussian"
    SUBEXPONENTIAL = "subexponential"


@dataclass(frozen=True)
class ConcentrationEnvelope:
    """Tail radius ``delta -> radius(delta)`` with its named constants.

    ``constants`` holds ``eta, c, variance_proxy, dim`` for the sub-Gaussian
    kind and ``lambda, A, C, R, r0, r1, alpha, beta, eta, dim`` for the
    sub-exponential kind.
    """

    kind: EnvelopeKind
    constants: dict = field(default_factory=dict)

    def radius(self, delta):
        delta = np.asarray(delta, dtype=float)
        if np.any((delta <= 0) | (delta >= 1)):
            raise DomainError("delta must lie in (0, 1)")
        k = self.constants
        if self.kind is EnvelopeKind.SUBGAUSSIAN:
            scale = 4.0 * math.sqrt(k["eta"] / (1.0 - k["c"]))
            r = scale * (math.sqrt(2 * k["dim"]) + np.sqrt(np.log(1.0 / delta)))
        else:
            r = k["R"] + k["C"] * np.log(k["A"] / delta)
        return float(r) if r.ndim == 0 else r


def contraction_coefficient(m, M, eta):
    """``max(|1 - eta m|, |1 - eta M|)``, the Lipschitz constant of ``x -> x - eta grad f(x)``
    around the minimiser."""
    if not 0 <= m <= M or M <= 0:
        raise DomainError(f"need 0 <= m <= M and M > 0, got m={m}, M={M}")
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    if eta > 2.0 / M:
        raise DomainError(f"eta={eta} exceeds 2/M={2.0 / M:g}; the algorithm is transient")
    return max(abs(1.0 - eta * m), abs(1.0 - eta * M))


def variance_proxy(eta, c):
    if not c < 1:
        raise EnvelopeUnavailableError("sub-Gaussian envelope needs c < 1 (strong convexity)")
    return 2.0 * eta / (1.0 - c)


def subgaussian_envelope(d, eta, c, delta=None):
    """Sub-Gaussian envelope; returns the radius at ``delta`` when given, else the envelope.

    radius(delta) = 4 sqrt(eta / (1 - c)) (sqrt(2 d) + sqrt(log 1/delta))
    """
    if not 0 <= c < 1:
        raise EnvelopeUnavailableError("sub-Gaussian envelope needs 0 <= c < 1 (requires m>0)")
    env = ConcentrationEnvelope(EnvelopeKind.SUBGAUSSIAN, {
        "eta": float(eta), "c": float(c), "variance_proxy": variance_proxy(eta, c), "dim": int(d),
    })
    return env if delta is None else env.radius(delta)


def exact_stationary_1d_quadratic(rho, eta):
    """Variance ``2 eta / (1 - c^2)``, ``c = |1 - eta rho|``, of the Gaussian
    stationary law on ``f(x) = rho x^2 / 2``."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if not 0 < eta < 2.0 / rho:
        raise DomainError(f"eta={eta} outside (0, 2/rho); the chain is transient")
    # 1 - c^2 = h (2 - h) with h = eta rho, which avoids cancellation as eta -> 0
    h = eta * rho
    return 2.0 * eta / (h * (2.0 - h))


def subexp_constants(d, eta, fit, r0):
    """Populate the sub-exponential envelope from growth constants ``fit`` and threshold ``r0``."""
    if not fit.beta > 0:
        raise EnvelopeUnavailableError("sub-exponential envelope needs beta > 0")
    beta, alpha = float(fit.beta), float(fit.alpha)
    lam = beta / 16.0
    q = eta * beta**2 / 256.0
    A = math.exp(q) / -math.expm1(-q)
    r1 = 2.0 * alpha / beta
    R = max(r0 / lam + eta * beta / 4.0, r1)
    return ConcentrationEnvelope(EnvelopeKind.SUBEXPONENTIAL, {
        "lambda": lam, "A": A, "C": 2.0 / lam, "R": R, "r0": float(r0), "r1": r1,
        "alpha": alpha, "beta": beta, "eta": float(eta), "dim": int(d),
    })


def subexp_envelope(d, eta, fit, r0, delta):
    """Radius ``R + C log(A / delta)`` and the populated envelope."""
    env = subexp_constants(d, eta, fit, r0)
    return env.radius(delta), env


def stationary_mgf_bound_sc(eta, c, lam):
    """Upper bound ``eta lam^2 / (1 - c)`` on ``log E[Phi_{d,lam}(X)]``."""
    if not c < 1:
        raise EnvelopeUnavailableError("bound needs c < 1")
    return eta * lam * lam / (1.0 - c)


def stationary_mgf_bound_convex(env):
    """Upper bound ``log A + log phi_d(lam R)`` on ``log E[Phi_{d,lam}(X)]``."""
    from .lyapunov import log_phi

    k = env.constants
    z = k["lambda"] * k["R"]
    if z < k["r0"]:
        warnings.warn(f"lambda*R={z:.4g} is below r0={k['r0']:.4g}; the bound's derivation "
                      "requires lambda*R >= r0", RuntimeWarning, stacklevel=2)
    return math.log(k["A"]) + log_phi(k["dim"], z)
