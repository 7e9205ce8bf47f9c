"""Statistical checks of sample ensembles against envelopes and exact laws.

The concentration results are one-sided inequalities, so a tail check
passes when a 99% Clopper-Pearson upper confidence bound on the exceedance
probability stays below the target ``delta``.  Sampling noise alone rarely
produces a failure, and a genuine violation is detected with high power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .bounds import contraction_coefficient, exact_stationary_1d_quadratic
from .exceptions import ConfigError, InapplicableError
from .lyapunov import big_phi_log, log_phi
from .potential import Kind, growth_constants
from .sampler import ChainConfig, SampleEnsemble

CONFIDENCE = 0.99
N_BOOT = 200
LEMMA_TOLERANCE = 1e-10


def ensemble_from_samples(samples, center=None, eta=float("nan"), digest="external"):
    """Wrap independent draws produced outside the sampler (e.g. from an exact law)."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if x.shape[0] == 1 and np.ndim(samples) == 1:
        x = x.T
    n, d = x.shape
    cfg = ChainConfig(eta=eta, dim=d, n_chains=n, burn_in=0)
    return SampleEnsemble(samples=x, chain=np.arange(n), record=np.zeros(n, dtype=int),
                          config=cfg, potential_digest=digest,
                          center=np.zeros(d) if center is None else np.asarray(center, float))


def exact_quadratic_samples(p, eta, n, seed=0):
    """Exact draws from the stationary law on a quadratic potential.

    Coordinates are independent ``N(0, 2 eta / (1 - c_i^2))`` with
    ``c_i = |1 - eta rho_i|``.
    """
    if p.kind is not Kind.QUADRATIC:
        raise InapplicableError("exact stationary law is only known for quadratic potentials")
    var = np.array([exact_stationary_1d_quadratic(r, eta) for r in p.params["curvatures"]])
    rng = np.random.default_rng(seed)
    x = p.minimizer + np.sqrt(var) * rng.standard_normal((n, p.dim))
    return ensemble_from_samples(x, center=p.minimizer, eta=eta, digest=p.digest())


def clopper_pearson_upper(k, n, confidence=CONFIDENCE):
    """One-sided upper confidence bound on a binomial proportion."""
    k = np.asarray(k)
    upper = stats.beta.ppf(confidence, k + 1, np.maximum(n - k, 1))
    return np.where(k >= n, 1.0, upper)


@dataclass
class TailReport:
    deltas: np.ndarray
    radii: np.ndarray
    empirical_p: np.ndarray
    ci_upper: np.ndarray
    verdict: np.ndarray
    n: int
    kind: str
    caveats: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.verdict))

    def rows(self):
        return [{"delta": float(d), "radius": float(r), "empirical_p": float(p),
                 "ci_upper": float(u), "verdict": "PASS" if v else "FAIL"}
                for d, r, p, u, v in zip(self.deltas, self.radii, self.empirical_p,
                                         self.ci_upper, self.verdict)]


def check_tail(ens: SampleEnsemble, env, deltas, confidence=CONFIDENCE) -> TailReport:
    if not ens.independent:
        raise ConfigError("tail checks need independent draws; set records_per_chain=1")
    deltas = np.asarray(deltas, dtype=float)
    if ens.n < 10.0 / deltas.min():
        raise ConfigError(f"need at least {math.ceil(10.0 / deltas.min())} samples "
                          f"for delta={deltas.min():g}, have {ens.n}")
    radii = np.atleast_1d(env.radius(deltas))
    norms = ens.radii()
    counts = np.array([np.count_nonzero(norms >= r) for r in radii])
    upper = clopper_pearson_upper(counts, ens.n, confidence)
    return TailReport(deltas=deltas, radii=radii, empirical_p=counts / ens.n, ci_upper=upper,
                      verdict=upper <= deltas, n=ens.n, kind=env.kind.value,
                      caveats=list(ens.caveats))


def ks_statistic(x, cdf):
    """Two-sided Kolmogorov-Smirnov distance between the sample ``x`` and ``cdf``."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


@dataclass
class KSResult:
    statistic: float
    critical: float
    variance: float
    passed: bool


def _require_1d_quadratic(ens):
    if ens.samples.shape[1] != 1:
        raise InapplicableError("exact law check needs a one-dimensional ensemble")
    if not (ens.potential_digest.startswith("quadratic") or ens.potential_digest == "external"):
        raise InapplicableError("exact law check needs a quadratic potential")
    if not ens.independent:
        raise ConfigError("exact law check needs one record per chain")


def ks_check_1d_quadratic(ens: SampleEnsemble, rho) -> KSResult:
    """KS test against ``N(0, 2 eta / (1 - c^2))`` at the 1% asymptotic critical value."""
    _require_1d_quadratic(ens)
    var = exact_stationary_1d_quadratic(rho, ens.config.eta)
    sd = math.sqrt(var)
    x = ens.samples[:, 0] - ens.center[0]
    d = ks_statistic(x, lambda t: stats.norm.cdf(t / sd))
    crit = 1.63 / math.sqrt(x.size)
    return KSResult(statistic=d, critical=crit, variance=var, passed=d < crit)


@dataclass
class VarianceResult:
    sample_variance: float
    expected: float
    stderr: float
    bootstrap_seed: int
    passed: bool


def check_variance_1d_quadratic(ens, rho, n_boot=N_BOOT, seed=0, n_se=3.0) -> VarianceResult:
    """Sample variance against the exact stationary variance, within ``n_se`` bootstrap SEs."""
    _require_1d_quadratic(ens)
    expected = exact_stationary_1d_quadratic(rho, ens.config.eta)
    x = ens.samples[:, 0]
    rng = np.random.default_rng(seed)
    boots = np.array([x[rng.integers(0, x.size, x.size)].var(ddof=1) for _ in range(n_boot)])
    v, se = float(x.var(ddof=1)), float(boots.std(ddof=1))
    return VarianceResult(v, expected, se, seed, abs(v - expected) <= n_se * se)


@dataclass
class MGFResult:
    lam: float
    empirical_log_mean: float
    log_bound: float
    stderr: float
    bootstrap_seed: int
    passed: bool


def check_stationary_mgf(ens: SampleEnsemble, d, lam, log_bound, n_boot=N_BOOT, seed=0,
                         n_se=3.0) -> MGFResult:
    """Compare ``log mean Phi_{d,lam}(X)`` with ``log_bound`` plus ``n_se`` bootstrap SEs."""
    if not ens.independent:
        raise ConfigError("MGF checks need one record per chain")
    vals = big_phi_log(d, lam, ens.samples - ens.center)
    n = vals.size
    est = float(logsumexp(vals) - math.log(n))
    rng = np.random.default_rng(seed)
    boots = np.array([logsumexp(vals[rng.integers(0, n, n)]) - math.log(n)
                      for _ in range(n_boot)])
    se = float(boots.std(ddof=1))
    return MGFResult(float(lam), est, float(log_bound), se, seed, est <= log_bound + n_se * se)


@dataclass
class LemmaRow:
    name: str
    n_points: int
    max_violation: float
    passed: bool


@dataclass
class LemmaReport:
    rows: list
    eta: float
    seed: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, name) -> LemmaRow:
        return next(r for r in self.rows if r.name == name)


def _directions(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sweep_lemma_inequalities(p, eta, n_points=1000, seed=0, lam=1.0,
                             tol=LEMMA_TOLERANCE) -> LemmaReport:
    """Largest relative violation of each pointwise inequality behind the tail bounds.

    * contractivity ``||x - eta grad f(x) - x*|| <= c ||x - x*||`` (with
      ``c = 1``, i.e. non-expansiveness, when ``m = 0``);
    * progress ``||x - eta grad f(x)|| <= ||x|| - eta beta / 4`` for
      ``||x|| >= r1`` when ``eta <= 1/M`` (centred potential);
    * the power inequality ``phi_d(c z) <= phi_d(z)^c`` for
      ``c in {0.1, 0.5, 0.9}`` and the potential's own contraction coefficient.
    """
    if n_points < 1000:
        raise ConfigError("n_points must be at least 1000")
    q = p.centered()
    d = q.dim
    rng = np.random.default_rng(seed)
    extremes = (10.0 ** np.arange(-3, 4))[:, None, None] * _directions(rng, 16, d)[None]
    pts = np.vstack([5.0 * rng.standard_normal((n_points, d)), extremes.reshape(-1, d)])
    norms = np.linalg.norm(pts, axis=1)
    rows = []

    c = contraction_coefficient(q.m, q.M, eta)
    after = np.linalg.norm(pts - eta * q.grad(pts), axis=1)
    viol = np.max((after - c * norms) / norms)
    rows.append(LemmaRow("contractivity" if q.m > 0 else "non_expansiveness",
                         len(pts), float(viol), bool(viol <= tol)))

    if eta <= 1.0 / q.M:
        fit = growth_constants(q)
        r1 = fit.r1
        radii = rng.uniform(r1, max(10.0 * r1, r1 + 50.0), n_points)
        far = np.vstack([radii[:, None] * _directions(rng, n_points, d),
                         pts[norms >= r1]])
        fn = np.linalg.norm(far, axis=1)
        after = np.linalg.norm(far - eta * q.grad(far), axis=1)
        viol = np.max((after - (fn - eta * fit.beta / 4.0)) / fn)
        rows.append(LemmaRow("progress", len(far), float(viol), bool(viol <= tol)))

    z = lam * norms
    lz = log_phi(d, z)
    worst = -np.inf
    powers = [0.1, 0.5, 0.9] + ([c] if 0 < c < 1 else [])
    for cc in powers:
        v = (log_phi(d, cc * z) - cc * lz) / np.maximum(1.0, np.abs(cc * lz))
        worst = max(worst, float(v.max()))
    rows.append(LemmaRow("power_inequality", len(pts) * len(powers), worst, bool(worst <= tol)))
    return LemmaReport(rows=rows, eta=float(eta), seed=int(seed))
