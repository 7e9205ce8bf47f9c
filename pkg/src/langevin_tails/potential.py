"""Convex potentials with gradients, curvature metadata and growth fits.

Every potential is described by an immutable :class:`PotentialSpec`.  The
built-in kinds (quadratic and Huber-like) are evaluated in closed form and are
also understood by the compiled sampler kernel; custom potentials carry Python
callables and run through the generic sampler path.

Points are arrays whose last axis has length ``dim``; leading axes are treated
as a batch, so ``p.eval(X)`` on an ``(n, d)`` array returns ``n`` values.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import FitFailureError, InvalidParameterError, ShapeError


class Kind(str, enum.Enum):
    QUADRATIC = "quadratic"
    HUBER = "huber"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SuperlinearFit:
    """Constants of the linear lower bound ``f(x) >= -alpha + beta * ||x||``.

    The bound is stated for the centred potential (minimiser at the origin,
    minimum value zero).
    """

    alpha: float
    beta: float
    fit_radius: float = float("inf")

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidParameterError(f"beta must be positive, got {self.beta}")

    @property
    def r1(self) -> float:
        """Radius beyond which a gradient step gains ``eta * beta / 4``."""
        return 2.0 * self.alpha / self.beta


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    kind: Kind
    dim: int
    params: dict
    m: float
    M: float
    minimizer: np.ndarray
    min_value: float = 0.0
    growth: Optional[SuperlinearFit] = None
    name: str = ""
    _value_fn: Optional[Callable] = field(default=None, repr=False)
    _grad_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParameterError(f"dim must be positive, got {self.dim}")
        if not (0.0 <= self.m <= self.M < np.inf) or self.M <= 0:
            raise InvalidParameterError(
                f"need 0 <= m <= M < inf and M > 0, got m={self.m}, M={self.M}")
        xstar = np.asarray(self.minimizer, dtype=float).reshape(self.dim)
        xstar.setflags(write=False)
        object.__setattr__(self, "minimizer", xstar)

    @property
    def strongly_convex(self) -> bool:
        return self.m > 0

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ShapeError(f"expected points with last axis {self.dim}, got shape {x.shape}")
        return x

    def eval(self, x):
        x = self._check(x)
        if self.kind is Kind.QUADRATIC:
            rho = self.params["curvatures"]
            return 0.5 * np.sum(rho * x * x, axis=-1)
        if self.kind is Kind.HUBER:
            beta, alpha, rb = self.params["beta"], self.params["alpha"], self.params["breakpoint"]
            r = np.linalg.norm(x, axis=-1)
            return np.where(r <= rb, 0.5 * beta**2 * r * r, beta * r - alpha)
        return np.asarray(self._value_fn(x), dtype=float)

    def grad(self, x):
        x = self._check(x)
        if self.kind is Kind.QUADRATIC:
            return self.params["curvatures"] * x
        if self.kind is Kind.HUBER:
            beta, rb = self.params["beta"], self.params["breakpoint"]
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            inner = r <= rb
            safe_r = np.where(inner, 1.0, r)
            return np.where(inner, beta**2 * x, beta * x / safe_r)
        return np.asarray(self._grad_fn(x), dtype=float)

    def centered(self) -> "PotentialSpec":
        """Translate so the minimiser sits at the origin with value zero."""
        if not np.any(self.minimizer) and self.min_value == 0.0:
            return self
        shift, base = self.minimizer.copy(), self.min_value
        return PotentialSpec(
            kind=Kind.CUSTOM, dim=self.dim, params={"centered_from": self.digest()},
            m=self.m, M=self.M, minimizer=np.zeros(self.dim), min_value=0.0,
            growth=self.growth, name=f"centered({self.name or self.kind.value})",
            _value_fn=lambda x: self.eval(x + shift) - base,
            _grad_fn=lambda x: self.grad(x + shift),
        )

    def to_config(self) -> dict:
        if self.kind is Kind.QUADRATIC:
            return {"kind": "quadratic", "curvatures": self.params["curvatures"].tolist()}
        if self.kind is Kind.HUBER:
            return {"kind": "huber", "beta": self.params["beta"], "dim": self.dim,
                    "smooth": self.params["smooth"]}
        raise InvalidParameterError("custom potentials have no config representation")

    def digest(self) -> str:
        if self.kind is Kind.CUSTOM:
            return f"custom:{self.name or 'anonymous'}"
        blob = json.dumps(self.to_config(), sort_keys=True).encode()
        return f"{self.kind.value}:{hashlib.sha256(blob).hexdigest()[:16]}"


def make_quadratic(dim, curvatures) -> PotentialSpec:
    """``f(x) = sum_i rho_i x_i^2 / 2`` with ``m = min rho``, ``M = max rho``."""
    rho = np.asarray(curvatures, dtype=float).reshape(-1)
    if rho.size != dim:
        raise InvalidParameterError(f"need {dim} curvatures, got {rho.size}")
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise InvalidParameterError(f"curvatures must be strictly positive, got {rho.tolist()}")
    rho.setflags(write=False)
    return PotentialSpec(kind=Kind.QUADRATIC, dim=int(dim), params={"curvatures": rho},
                         m=float(rho.min()), M=float(rho.max()), minimizer=np.zeros(dim),
                         name="quadratic")


def make_huber_like(beta, dim=1, smooth=False) -> PotentialSpec:
    """Radial quadratic-then-linear potential with linear slope ``beta``.

    With ``smooth=False`` (the default) the pieces are ``beta^2 r^2 / 2`` for
    ``r <= 1`` and ``beta r - alpha`` beyond, ``alpha = beta - beta^2 / 2``.
    That function is continuous and convex but its gradient jumps from
    ``beta^2`` to ``beta`` in norm at ``r = 1``; ``M = beta^2`` is the
    curvature of the quadratic piece, not a global Lipschitz constant.

    ``smooth=True`` moves the breakpoint to ``r = 1/beta`` (``alpha = 1/2``),
    which makes the gradient continuous and ``beta^2``-Lipschitz.
    """
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise InvalidParameterError(f"beta must lie in (0, 1), got {beta}")
    if smooth:
        rb, alpha = 1.0 / beta, 0.5
    else:
        rb, alpha = 1.0, beta - 0.5 * beta**2
    params = {"beta": beta, "alpha": alpha, "breakpoint": rb, "smooth": bool(smooth)}
    return PotentialSpec(kind=Kind.HUBER, dim=int(dim), params=params, m=0.0, M=beta**2,
                         minimizer=np.zeros(dim), growth=SuperlinearFit(alpha, beta),
                         name="huber-smooth" if smooth else "huber")


def make_custom(value_fn, grad_fn, dim, m, M, minimizer=None, min_value=None,
                growth=None, name="custom") -> PotentialSpec:
    """Wrap user callables.  ``m``, ``M`` and the minimiser are trusted as given;
    use :func:`certify` to test them statistically."""
    xstar = np.zeros(dim) if minimizer is None else np.asarray(minimizer, dtype=float)
    if min_value is None:
        min_value = float(value_fn(xstar.reshape(1, -1))[0])
    return PotentialSpec(kind=Kind.CUSTOM, dim=int(dim), params={}, m=float(m), M=float(M),
                         minimizer=xstar, min_value=float(min_value), growth=growth,
                         name=name, _value_fn=value_fn, _grad_fn=grad_fn)


def from_config(block: dict) -> PotentialSpec:
    kind = block.get("kind")
    if kind == "quadratic":
        curv = block["curvatures"]
        return make_quadratic(len(curv), curv)
    if kind == "huber":
        return make_huber_like(block["beta"], block.get("dim", 1), block.get("smooth", False))
    raise InvalidParameterError(f"unknown potential kind {kind!r}")


def _unit_directions(rng, n, dim):
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def fit_superlinear(p, probe_radius=100.0, n_directions=64, rng_seed=0) -> SuperlinearFit:
    """Fit ``(alpha, beta)`` with ``f(x) >= -alpha + beta ||x||`` for the centred ``p``.

    ``beta`` is 0.9 times the smallest secant slope ``f(R v) / R`` over the
    probe directions (random unit vectors plus the coordinate axes).
    ``alpha`` is the largest gap ``beta r - f(r v)`` over a log-spaced radial
    grid, refined per direction by ternary search; the gap is concave in ``r``
    so the refinement finds its maximum between grid points.
    """
    q = p.centered()
    rng = np.random.default_rng(rng_seed)
    axes = np.vstack([np.eye(q.dim), -np.eye(q.dim)])
    dirs = np.vstack([_unit_directions(rng, int(n_directions), q.dim), axes])
    R = float(probe_radius)
    beta = 0.9 * float(np.min(q.eval(R * dirs))) / R
    if not beta > 0:
        raise FitFailureError(
            f"fitted slope {beta:.3g} is not positive at probe_radius={R}; "
            "increase probe_radius")

    radii = np.geomspace(1e-3, R, 64)
    pts = radii[:, None, None] * dirs[None, :, :]
    gap = beta * radii[:, None] - q.eval(pts)
    k = np.argmax(gap, axis=0)
    lo = radii[np.maximum(k - 1, 0)]
    hi = radii[np.minimum(k + 1, radii.size - 1)]
    lo = np.where(k == 0, 0.0, lo)

    def ray_gap(r):
        return beta * r - q.eval(r[:, None] * dirs)

    # ternary search on every ray at once; each pass keeps 2/3 of the bracket
    for _ in range(120):
        a = lo + (hi - lo) / 3.0
        b = hi - (hi - lo) / 3.0
        left = ray_gap(a) < ray_gap(b)
        lo = np.where(left, a, lo)
        hi = np.where(left, hi, b)
    alpha = max(float(gap.max()), float(ray_gap(0.5 * (lo + hi)).max()))
    return SuperlinearFit(alpha=max(alpha, 0.0), beta=beta, fit_radius=R)


def growth_constants(p, probe_radius=100.0, rng_seed=0) -> SuperlinearFit:
    """Known growth constants when the potential carries them, else a fit."""
    if p.growth is not None:
        return p.growth
    return fit_superlinear(p, probe_radius=probe_radius, rng_seed=rng_seed)


def certify(p, n=1000, seed=0, scale=5.0) -> dict:
    """Statistical checks of the declared metadata of ``p``.

    Returns the worst observed value of each certificate; a certificate holds
    when its entry is ``<= 0`` (``grad_rel_error`` is compared to ``1e-5``).
    """
    rng = np.random.default_rng(seed)
    d = p.dim
    x = p.minimizer + scale * rng.standard_normal((n, d))
    y = p.minimizer + scale * rng.standard_normal((n, d))

    h = 1e-5
    pts = x[:100]
    fd = np.empty_like(pts)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fd[:, i] = (p.eval(pts + e) - p.eval(pts - e)) / (2 * h)
    g = p.grad(pts)
    grad_err = np.linalg.norm(fd - g, axis=1) / np.maximum(np.linalg.norm(g, axis=1), 1.0)

    gx, gy = p.grad(x), p.grad(y)
    dist = np.linalg.norm(x - y, axis=1)
    lipschitz = np.linalg.norm(gx - gy, axis=1) - p.M * dist * (1 + 1e-10)
    strong = -np.inf
    if p.m > 0:
        lower = p.eval(x) + np.sum(gx * (y - x), axis=1) + 0.5 * p.m * dist**2
        strong = float(np.max(lower - p.eval(y) - 1e-10))
    stationarity = float(np.linalg.norm(p.grad(p.minimizer)))
    return {
        "grad_rel_error": float(grad_err.max()),
        "smoothness": float(lipschitz.max()),
        "strong_convexity": strong,
        "stationarity": stationarity - 1e-10 * max(1.0, p.M * np.linalg.norm(p.minimizer)),
    }
