"""The discrete-time Langevin Algorithm.

One iteration is a gradient step followed by Gaussian convolution::

    x <- x - eta * grad f(x) + sqrt(2 * eta) * z,   z ~ N(0, I_d)

Ensembles run many independent chains.  Built-in potentials go through a
compiled kernel that advances blocks of chains in lockstep; custom potentials
use a vectorised Python loop.  Both draw noise from the counter-based streams
in :mod:`langevin_tails._rng`, so the output depends only on the potential
and the :class:`ChainConfig`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numba as nb
import numpy as np
from numba import int64, uint32

from . import _rng
from .bounds import contraction_coefficient
from .exceptions import BurnInUnavailableError, ConfigError, DivergenceError, ShapeError
from .potential import Kind, PotentialSpec

_LANES = 256
_TASK_CHAINS = 4096
BURN_IN_TOLERANCE = 1e-12


@dataclass
class ChainConfig:
    eta: float
    dim: int
    n_chains: int = 10_000
    burn_in: Optional[int] = None
    record_every: int = 1
    records_per_chain: int = 1
    seed: int = 0
    init: Optional[list] = None

    def validate(self, p: PotentialSpec) -> None:
        if self.dim != p.dim:
            raise ConfigError(f"config dim {self.dim} != potential dim {p.dim}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError(f"eta must be positive and finite, got {self.eta}")
        if self.eta >= 2.0 / p.M:
            raise ConfigError(f"eta={self.eta} violates eta < 2/M = {2.0 / p.M:g}; "
                              "the chain is transient")
        if self.n_chains < 1 or self.record_every < 1 or self.records_per_chain < 1:
            raise ConfigError("n_chains, record_every and records_per_chain must be >= 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.init is not None and np.asarray(self.init).size != self.dim:
            raise ConfigError(f"init must have {self.dim} coordinates")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, block: dict) -> "ChainConfig":
        known = {k: block[k] for k in cls.__dataclass_fields__ if k in block}
        return cls(**known)


@dataclass
class SampleEnsemble:
    samples: np.ndarray
    chain: np.ndarray
    record: np.ndarray
    config: ChainConfig
    potential_digest: str
    center: np.ndarray
    caveats: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def independent(self) -> bool:
        return self.config.records_per_chain == 1

    def radii(self) -> np.ndarray:
        """Distances of the samples from the potential's minimiser."""
        return np.linalg.norm(self.samples - self.center, axis=1)


def gd_step(p: PotentialSpec, x, eta):
    x = np.asarray(x, dtype=float)
    return x - eta * p.grad(x)


def step(p: PotentialSpec, x, eta, noise):
    """One Langevin update given a standard-normal ``noise`` vector."""
    noise = np.asarray(noise, dtype=float)
    if noise.shape != np.shape(x):
        raise ShapeError(f"noise shape {noise.shape} != state shape {np.shape(x)}")
    return gd_step(p, x, eta) + math.sqrt(2.0 * eta) * noise


def default_burn_in(p: PotentialSpec, eta: float) -> int:
    """Iterations for the gradient map's contraction to shrink the initial
    distance by a factor ``1e-12``; only defined for strongly convex ``p``."""
    if p.m <= 0:
        raise BurnInUnavailableError(
            "no default burn-in for a merely convex potential (m=0); set burn_in explicitly")
    c = contraction_coefficient(p.m, p.M, eta)
    if c <= 0.0:
        return 1
    return max(1, math.ceil(math.log(1.0 / BURN_IN_TOLERANCE) / -math.log(c)))


@nb.njit(nogil=True, cache=True, error_model="numpy")
def _run_block(kind, curv, beta, rb, x0, k0, k1, eta, burn_in, every, records, out, xt, ratio):
    """Advance chains ``x0`` and write records into ``out``.

    Returns ``(chain, iteration)`` of the first non-finite state or ``(-1, -1)``.
    """
    n, d = x0.shape
    L = _LANES
    s = math.sqrt(2.0 * eta)
    X = np.empty((d, L))
    Z = np.empty((d, L))
    U = np.empty(L)
    I = np.empty(L, np.int64)
    fac = np.empty(L)
    total = burn_in + (records - 1) * every
    for b0 in range(0, n, L):
        nl = min(L, n - b0)
        for c in range(nl):
            for j in range(d):
                X[j, c] = x0[b0 + c, j]
        rec = 0
        for t in range(total + 1):
            if t >= burn_in and (t - burn_in) % every == 0:
                for c in range(nl):
                    for j in range(d):
                        out[b0 + c, rec, j] = X[j, c]
                rec += 1
            if t == total:
                break
            for j in range(d):
                idx = int64(t) * d + j
                lo = uint32(idx & 0xFFFFFFFF)
                hi = uint32(idx >> 32)
                for c in range(nl):
                    U[c], I[c] = _rng.first_attempt(lo, hi, k0[b0 + c], k1[b0 + c])
                for c in range(nl):
                    u = U[c]
                    i = I[c]
                    if abs(u) < ratio[i]:
                        Z[j, c] = u * xt[i]
                    else:
                        Z[j, c] = _rng.normal_at(lo, hi, k0[b0 + c], k1[b0 + c], xt, ratio)
            if kind == 0:
                for j in range(d):
                    rho = curv[j]
                    for c in range(nl):
                        x = X[j, c]
                        X[j, c] = x - eta * (rho * x) + s * Z[j, c]
            else:
                for c in range(nl):
                    fac[c] = 0.0
                for j in range(d):
                    for c in range(nl):
                        fac[c] += X[j, c] * X[j, c]
                for c in range(nl):
                    fac[c] = math.sqrt(fac[c])
                for j in range(d):
                    for c in range(nl):
                        x = X[j, c]
                        if fac[c] <= rb:
                            g = (beta * beta) * x
                        else:
                            g = beta * x / fac[c]
                        X[j, c] = x - eta * g + s * Z[j, c]
            acc = 0.0
            for j in range(d):
                for c in range(nl):
                    acc += X[j, c] * 0.0
            if acc != 0.0:
                for c in range(nl):
                    for j in range(d):
                        if not math.isfinite(X[j, c]):
                            return b0 + c, t + 1
    return -1, -1


def _kernel_params(p):
    if p.kind is Kind.QUADRATIC:
        return 0, np.ascontiguousarray(p.params["curvatures"], dtype=float), 0.0, 0.0
    return 1, np.zeros(1), p.params["beta"], p.params["breakpoint"]


def _run_generic(p, cfg, burn_in, x0, chains, out):
    s = math.sqrt(2.0 * cfg.eta)
    x = x0.copy()
    total = burn_in + (cfg.records_per_chain - 1) * cfg.record_every
    rec = 0
    for t in range(total + 1):
        if t >= burn_in and (t - burn_in) % cfg.record_every == 0:
            out[:, rec, :] = x
            rec += 1
        if t == total:
            break
        z = _rng.stream_normals(cfg.seed, chains, t, cfg.dim)
        x = x - cfg.eta * p.grad(x) + s * z
        bad = ~np.all(np.isfinite(x), axis=1)
        if bad.any():
            raise DivergenceError(int(chains[np.argmax(bad)]), t + 1)


def run_ensemble(p: PotentialSpec, cfg: ChainConfig, threads: int = 1) -> SampleEnsemble:
    """Run ``cfg.n_chains`` independent chains and collect their records.

    Chains are split into fixed tasks of 4096 and farmed out to ``threads``
    workers (``0`` means one per CPU); each chain's trajectory is computed
    independently, so the ensemble is bit-identical for any thread count.
    """
    cfg.validate(p)
    burn_in = default_burn_in(p, cfg.eta) if cfg.burn_in is None else int(cfg.burn_in)
    n, d, R = cfg.n_chains, cfg.dim, cfg.records_per_chain
    init = p.minimizer if cfg.init is None else np.asarray(cfg.init, dtype=float)
    x0 = np.ascontiguousarray(np.broadcast_to(init, (n, d)), dtype=float)
    chains = np.arange(n, dtype=np.int64)
    out = np.empty((n, R, d))

    if p.kind is Kind.CUSTOM:
        _run_generic(p, cfg, burn_in, x0, chains, out)
    else:
        kind, curv, beta, rb = _kernel_params(p)
        k0, k1 = _rng.chain_keys(cfg.seed, chains)

        def task(lo):
            hi = min(lo + _TASK_CHAINS, n)
            return _run_block(kind, curv, beta, rb, x0[lo:hi], k0[lo:hi], k1[lo:hi],
                              float(cfg.eta), burn_in, cfg.record_every, R, out[lo:hi],
                              _rng.ZIG_X, _rng.ZIG_RATIO)

        starts = range(0, n, _TASK_CHAINS)
        if threads == 1:
            results = [task(lo) for lo in starts]
        else:
            with ThreadPoolExecutor(max_workers=threads or None) as pool:
                results = list(pool.map(task, starts))
        failures = [(c, it) for c, it in results if c >= 0]
        if failures:
            chain, it = min(failures, key=lambda f: (f[1], f[0]))
            raise DivergenceError(chain, it)

    resolved = ChainConfig(**{**cfg.to_dict(), "burn_in": burn_in})
    caveats = []
    if p.m <= 0:
        caveats.append("potential is not strongly convex: burn-in was user-chosen and "
                       "no stationarity guarantee applies")
    if R > 1:
        caveats.append("records within a chain are correlated")
    return SampleEnsemble(
        samples=out.reshape(n * R, d),
        chain=np.repeat(chains, R),
        record=np.tile(np.arange(R), n),
        config=resolved,
        potential_digest=p.digest(),
        center=p.minimizer.copy(),
        caveats=caveats,
    )
