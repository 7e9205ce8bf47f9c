"""Command-line front end.

Subcommands::

    sample     run an ensemble, write samples.csv and meta.json
    verify     run one verification suite (--kind) and write report files
    lyapunov   tabulate log phi_d and its log-derivative
    envelope   write the concentration envelope for a list of deltas

Settings come from a JSON config (``--config``); command-line flags override
the file, which overrides built-in defaults.

Exit codes: 0 success, 1 internal error, 2 config or applicability error,
3 divergence, 4 verification failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds, io, lyapunov, verify
from .exceptions import (ConfigError, DivergenceError, EnvelopeUnavailableError,
                         InapplicableError, InvalidParameterError, LangevinTailsError)
from .potential import Kind, from_config, growth_constants
from .sampler import ChainConfig, run_ensemble

log = logging.getLogger("langevin_tails")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_FAIL = 0, 1, 2, 3, 4

DEFAULTS = {
    "potential": {"kind": "quadratic", "curvatures": [1.0]},
    "chain": {"eta": 0.1, "n_chains": 10_000, "burn_in": None, "record_every": 1,
              "records_per_chain": 1, "seed": 0},
    "verify": {"deltas": [0.3, 0.1, 0.01], "lambdas": [0.25, 0.5, 1.0], "n_points": 1000,
               "bootstrap_seed": 0},
    "out": "out",
}
VERIFY_KINDS = ("subgaussian", "subexponential", "exact1d", "lemmas", "mgf")


@dataclass
class RunConfig:
    potential: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["potential"]))
    chain: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["chain"]))
    verify: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["verify"]))
    out: str = DEFAULTS["out"]

    def to_dict(self) -> dict:
        return {"potential": self.potential, "chain": self.chain, "verify": self.verify,
                "out": self.out}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        merged = copy.deepcopy(DEFAULTS)
        for key in ("chain", "verify"):
            merged[key].update(raw.get(key, {}))
        if "potential" in raw:
            merged["potential"] = dict(raw["potential"])
        merged["out"] = raw.get("out", merged["out"])
        return cls(**merged)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """Digest of the fields that determine results; the output directory is excluded."""
        return io.config_digest({k: v for k, v in self.to_dict().items() if k != "out"})

    def build(self):
        p = from_config(self.potential)
        cfg = ChainConfig.from_dict({**self.chain, "dim": p.dim})
        cfg.validate(p)
        return p, cfg


def _load_config(args) -> RunConfig:
    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    rc = RunConfig.from_dict(raw)
    if args.seed is not None:
        rc.chain["seed"] = args.seed
    if args.out is not None:
        rc.out = args.out
    return rc


def _outdir(rc) -> Path:
    out = Path(rc.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_sample(rc: RunConfig, threads: int) -> int:
    p, cfg = rc.build()
    out = _outdir(rc)
    t0 = time.perf_counter()
    ens = run_ensemble(p, cfg, threads=threads)
    wall = time.perf_counter() - t0
    seed, digest = cfg.seed, rc.digest()
    io.write_ensemble_csv(ens, out / "samples.csv", seed, digest)
    io.write_json(out / "meta.json", {
        "config": rc.to_dict(), "config_digest": digest, "seed": seed,
        "burn_in": ens.config.burn_in, "potential_digest": ens.potential_digest,
        "wall_time_s": wall, "n_rows": ens.n, "caveats": ens.caveats,
    })
    log.info("wrote %d samples to %s", ens.n, out / "samples.csv")
    return EXIT_OK


def _tail_fields():
    return ["delta", "radius", "empirical_p", "ci_upper", "verdict"]


def _run_verify(kind, p, cfg, rc, threads):
    """Returns ``(passed, fieldnames, rows, extra_summary)``."""
    vb = rc.verify
    boot_seed = int(vb.get("bootstrap_seed", 0))

    if kind == "lemmas":
        rep = verify.sweep_lemma_inequalities(p, cfg.eta, n_points=int(vb["n_points"]),
                                              seed=cfg.seed)
        rows = [{"name": r.name, "n_points": r.n_points, "max_violation": r.max_violation,
                 "verdict": "PASS" if r.passed else "FAIL"} for r in rep.rows]
        return rep.passed, ["name", "n_points", "max_violation", "verdict"], rows, {}

    if kind == "subgaussian" and p.m <= 0:
        raise InapplicableError("subgaussian verification requires m>0")
    if kind == "subexponential" and cfg.eta > 1.0 / p.M:
        raise InapplicableError(f"subexponential verification requires eta <= 1/M = {1 / p.M:g}")
    if kind == "exact1d" and not (p.kind is Kind.QUADRATIC and p.dim == 1):
        raise InapplicableError("exact1d verification requires a one-dimensional quadratic")
    if kind == "mgf" and p.m <= 0 and cfg.eta > 1.0 / p.M:
        raise InapplicableError("convex mgf verification requires eta <= 1/M")
    if cfg.records_per_chain != 1:
        raise ConfigError(f"{kind} verification needs records_per_chain=1")

    ens = run_ensemble(p, cfg, threads=threads)
    extra = {"caveats": ens.caveats, "burn_in": ens.config.burn_in}

    if kind in ("subgaussian", "subexponential"):
        if kind == "subgaussian":
            env = bounds.subgaussian_envelope(p.dim, cfg.eta,
                                              bounds.contraction_coefficient(p.m, p.M, cfg.eta))
        else:
            env = bounds.subexp_constants(p.dim, cfg.eta, growth_constants(p),
                                          lyapunov.estimate_r0(p.dim))
        rep = verify.check_tail(ens, env, vb["deltas"])
        extra["constants"] = env.constants
        return rep.passed, _tail_fields(), rep.rows(), extra

    if kind == "exact1d":
        rho = float(p.params["curvatures"][0])
        ks = verify.ks_check_1d_quadratic(ens, rho)
        var = verify.check_variance_1d_quadratic(ens, rho, seed=boot_seed)
        rows = [
            {"check": "ks", "statistic": ks.statistic, "threshold": ks.critical,
             "verdict": "PASS" if ks.passed else "FAIL"},
            {"check": "variance", "statistic": var.sample_variance,
             "threshold": 3 * var.stderr, "verdict": "PASS" if var.passed else "FAIL"},
        ]
        extra.update(expected_variance=var.expected, bootstrap_seed=boot_seed)
        return ks.passed and var.passed, ["check", "statistic", "threshold", "verdict"], rows, extra

    # mgf
    results = []
    if p.m > 0:
        c = bounds.contraction_coefficient(p.m, p.M, cfg.eta)
        for lam in vb["lambdas"]:
            bound = bounds.stationary_mgf_bound_sc(cfg.eta, c, lam)
            results.append(verify.check_stationary_mgf(ens, p.dim, lam, bound, seed=boot_seed))
    else:
        env = bounds.subexp_constants(p.dim, cfg.eta, growth_constants(p),
                                      lyapunov.estimate_r0(p.dim))
        lam = env.constants["lambda"]
        bound = bounds.stationary_mgf_bound_convex(env)
        results.append(verify.check_stationary_mgf(ens, p.dim, lam, bound, seed=boot_seed))
        extra["constants"] = env.constants
    rows = [{"lambda": r.lam, "empirical_log_mean": r.empirical_log_mean,
             "log_bound": r.log_bound, "stderr": r.stderr,
             "verdict": "PASS" if r.passed else "FAIL"} for r in results]
    extra["bootstrap_seed"] = boot_seed
    return (all(r.passed for r in results),
            ["lambda", "empirical_log_mean", "log_bound", "stderr", "verdict"], rows, extra)


def cmd_verify(rc: RunConfig, kind: str, threads: int) -> int:
    if kind not in VERIFY_KINDS:
        raise ConfigError(f"unknown verification kind {kind!r}")
    p, cfg = rc.build()
    out = _outdir(rc)
    seed, digest = cfg.seed, rc.digest()
    try:
        passed, fields, rows, extra = _run_verify(kind, p, cfg, rc, threads)
    except (InapplicableError, ConfigError) as exc:
        io.write_json(out / f"report_{kind}.json", {
            "kind": kind, "passed": False, "seed": seed, "config_digest": digest,
            "error": str(exc), "rows": [],
        })
        raise
    io.write_rows_csv(out / f"report_{kind}.csv", rows, fields, seed, digest)
    io.write_json(out / f"report_{kind}.json", {
        "kind": kind, "passed": passed, "seed": seed, "config_digest": digest,
        "rows": rows, **extra,
    })
    for row in rows:
        print(", ".join(f"{k}={row[k]}" for k in fields))
    print(f"{kind}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAIL


def cmd_lyapunov(d, lam, z_max, steps, oracle, out_dir, seed=0, digest="") -> int:
    if d < 1:
        raise ConfigError("d must be >= 1")
    if z_max <= 0:
        z = np.zeros(1)
    else:
        z = np.geomspace(min(1e-3, z_max), z_max, max(int(steps), 1))
    lp = lyapunov.log_phi(d, z)
    ld = np.where(z > 0, lyapunov.log_derivative(d, np.where(z > 0, z, 1.0)), 0.0)
    fields = ["d", "z", "log_phi", "log_derivative"]
    rows = [{"d": d, "z": float(a), "log_phi": float(b), "log_derivative": float(c)}
            for a, b, c in zip(z, lp, ld)]
    if oracle:
        if d == 1:
            ref = np.logaddexp(z, -z) - math.log(2.0)
        else:
            ref = np.array([lyapunov.phi_quadrature_oracle(d, float(a)) for a in z])
        for row, r in zip(rows, ref):
            row["oracle"] = float(r)
        fields.append("oracle")
        print(f"max |log_phi - oracle| = {float(np.max(np.abs(lp - ref))):.3e}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = digest or io.config_digest({"d": d, "lambda": lam, "z_max": z_max, "steps": steps})
    io.write_rows_csv(out / "lyapunov.csv", rows, fields, seed, digest)
    return EXIT_OK


def cmd_envelope(rc: RunConfig, deltas) -> int:
    p = from_config(rc.potential)
    eta = float(rc.chain["eta"])
    deltas = list(deltas or rc.verify["deltas"])
    envs = []
    if p.m > 0:
        c = bounds.contraction_coefficient(p.m, p.M, eta)
        envs.append(bounds.subgaussian_envelope(p.dim, eta, c))
    if eta <= 1.0 / p.M:
        try:
            envs.append(bounds.subexp_constants(p.dim, eta, growth_constants(p),
                                                lyapunov.estimate_r0(p.dim)))
        except LangevinTailsError as exc:
            log.warning("sub-exponential envelope unavailable: %s", exc)
    if not envs:
        raise EnvelopeUnavailableError("no envelope applies to this potential and stepsize")
    rows, tighter = [], []
    for delta in deltas:
        radii = {env.kind.value: env.radius(delta) for env in envs}
        for kind, r in radii.items():
            rows.append({"delta": delta, "radius": r, "kind": kind})
        tighter.append({"delta": delta, "kind": min(radii, key=radii.get)})
    out = _outdir(rc)
    seed, digest = rc.chain.get("seed", 0), rc.digest()
    io.write_rows_csv(out / "envelope.csv", rows, ["delta", "radius", "kind"], seed, digest)
    io.write_json(out / "envelope.json", {
        "seed": seed, "config_digest": digest, "tighter": tighter,
        "constants": {env.kind.value: env.constants for env in envs},
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="langevin-tails", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sample", parents=[common], help="run an ensemble")
    pv = sub.add_parser("verify", parents=[common], help="run a verification suite")
    pv.add_argument("--kind", required=True, choices=VERIFY_KINDS)
    pl = sub.add_parser("lyapunov", parents=[common], help="tabulate log phi_d")
    pl.add_argument("--d", type=int, required=True)
    pl.add_argument("--lambda", dest="lam", type=float, default=1.0)
    pl.add_argument("--z-max", type=float, default=100.0)
    pl.add_argument("--steps", type=int, default=50)
    pl.add_argument("--oracle", action="store_true")
    pe = sub.add_parser("envelope", parents=[common], help="write tail envelopes")
    pe.add_argument("--deltas", type=float, nargs="+")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        if args.command == "lyapunov":
            return cmd_lyapunov(args.d, args.lam, args.z_max, args.steps, args.oracle,
                                args.out or DEFAULTS["out"], seed=args.seed or 0)
        rc = _load_config(args)
        if args.command == "sample":
            return cmd_sample(rc, args.threads)
        if args.command == "verify":
            return cmd_verify(rc, args.kind, args.threads)
        return cmd_envelope(rc, args.deltas)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigError, InapplicableError, InvalidParameterError,
            EnvelopeUnavailableError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LangevinTailsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
