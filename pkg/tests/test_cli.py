import json
import math

import pytest

from langevin_tails import cli
from langevin_tails.cli import RunConfig, main
from langevin_tails.io import read_ensemble_csv, read_rows_csv


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _small(**chain):
    return {"potential": {"kind": "quadratic", "curvatures": [1.0]},
            "chain": {"eta": 0.1, "n_chains": 2000, **chain}}


def test_run_config_round_trip():
    rc = RunConfig.from_dict({"potential": {"kind": "huber", "beta": 0.5, "dim": 2},
                              "chain": {"eta": 1.0, "burn_in": 10, "seed": 2**63},
                              "verify": {"deltas": [0.2]}, "out": "x"})
    assert RunConfig.from_json(rc.to_json()) == rc
    assert RunConfig.from_json(rc.to_json()).digest() == rc.digest()


def test_run_config_rejects_unknown_sections():
    with pytest.raises(cli.ConfigError):
        RunConfig.from_dict({"chains": {}})


def test_sample_writes_files(tmp_path):
    out = tmp_path / "o"
    cfg = _write(tmp_path, _small(records_per_chain=3, record_every=2))
    assert main(["sample", "--config", cfg, "--out", str(out)]) == 0
    chain, record, x = read_ensemble_csv(out / "samples.csv")
    assert x.shape == (6000, 1)
    meta = json.loads((out / "meta.json").read_text())
    assert meta["seed"] == 0 and meta["wall_time_s"] >= 0
    assert meta["config"]["chain"]["records_per_chain"] == 3
    assert meta["burn_in"] == 263
    first = (out / "samples.csv").read_text().splitlines()[0]
    assert first == f"# seed=0 config_digest={meta['config_digest']}"


def test_flags_override_file(tmp_path):
    cfg = _write(tmp_path, {**_small(seed=5), "out": str(tmp_path / "from_file")})
    assert main(["sample", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "flag")]) == 0
    meta = json.loads((tmp_path / "flag" / "meta.json").read_text())
    assert meta["seed"] == 7 and meta["config"]["chain"]["n_chains"] == 2000
    assert not (tmp_path / "from_file").exists()


def test_sample_deterministic(tmp_path):
    cfg = _write(tmp_path, _small(seed=3))
    main(["sample", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["sample", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "0"])
    assert (tmp_path / "a/samples.csv").read_bytes() == (tmp_path / "b/samples.csv").read_bytes()


def test_transient_step_is_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, _small(eta=3.0))
    assert main(["sample", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "2/M" in capsys.readouterr().err
    assert not (tmp_path / "o" / "samples.csv").exists()


def test_bad_json_is_config_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["sample", "--config", str(path)]) == 2


def test_divergence_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, _small(init=[float("inf")], burn_in=5))
    assert main(["sample", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    err = capsys.readouterr().err
    assert "chain 0" in err and "iteration 1" in err


def test_verify_subgaussian_on_huber(tmp_path, capsys):
    cfg = _write(tmp_path, {"potential": {"kind": "huber", "beta": 0.5},
                            "chain": {"eta": 1.0, "burn_in": 100}})
    assert main(["verify", "--kind", "subgaussian", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 2
    assert "requires m>0" in capsys.readouterr().err
    report = json.loads((tmp_path / "o" / "report_subgaussian.json").read_text())
    assert report["passed"] is False and "m>0" in report["error"]


def test_verify_exact1d_defaults(tmp_path):
    out = tmp_path / "o"
    assert main(["verify", "--kind", "exact1d", "--out", str(out)]) == 0
    rows = read_rows_csv(out / "report_exact1d.csv")
    assert [r["check"] for r in rows] == ["ks", "variance"]
    report = json.loads((out / "report_exact1d.json").read_text())
    assert report["passed"] and report["bootstrap_seed"] == 0 and report["seed"] == 0


@pytest.mark.parametrize("potential,eta", [
    ({"kind": "quadratic", "curvatures": [1.0]}, 0.1),
    ({"kind": "quadratic", "curvatures": [0.5, 2.0]}, 0.4),
    ({"kind": "huber", "beta": 0.5}, 1.0),
    ({"kind": "huber", "beta": 0.5, "dim": 3, "smooth": True}, 3.0),
])
def test_verify_lemmas_builtins(tmp_path, potential, eta):
    cfg = _write(tmp_path, {"potential": potential, "chain": {"eta": eta}})
    assert main(["verify", "--kind", "lemmas", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 0


def test_verify_fail_exit_code(tmp_path, monkeypatch):
    # a subgaussian check against an envelope scaled far below the truth must FAIL
    from langevin_tails import bounds

    real = bounds.subgaussian_envelope

    def shrunk(d, eta, c, delta=None):
        env = real(d, eta, c)
        return bounds.ConcentrationEnvelope(env.kind, {**env.constants, "eta": eta * 1e-4})

    monkeypatch.setattr(bounds, "subgaussian_envelope", shrunk)
    cfg = _write(tmp_path, _small())
    assert main(["verify", "--kind", "subgaussian", "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 4
    rows = read_rows_csv(tmp_path / "o" / "report_subgaussian.csv")
    assert {r["verdict"] for r in rows} == {"FAIL"}


def test_verify_mgf_and_subexp(tmp_path):
    cfg = _write(tmp_path, {"potential": {"kind": "huber", "beta": 0.5},
                            "chain": {"eta": 1.0, "burn_in": 2000, "n_chains": 2000},
                            "verify": {"deltas": [0.1, 0.01]}})
    for kind in ("subexponential", "mgf"):
        assert main(["verify", "--kind", kind, "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 0
        report = json.loads((tmp_path / "o" / f"report_{kind}.json").read_text())
        assert any("not strongly convex" in c for c in report["caveats"])


def test_lyapunov_table_d1(tmp_path):
    assert main(["lyapunov", "--d", "1", "--z-max", "50", "--steps", "20",
                 "--out", str(tmp_path)]) == 0
    rows = read_rows_csv(tmp_path / "lyapunov.csv")
    assert len(rows) == 20
    assert list(rows[0]) == ["d", "z", "log_phi", "log_derivative"]
    for r in rows:
        z = float(r["z"])
        assert float(r["log_phi"]) == pytest.approx(math.log(math.cosh(z)), rel=1e-12)


def test_lyapunov_oracle_column(tmp_path, capsys):
    assert main(["lyapunov", "--d", "5", "--z-max", "200", "--steps", "15", "--oracle",
                 "--out", str(tmp_path)]) == 0
    printed = capsys.readouterr().out
    gap = float(printed.strip().split("=")[-1])
    assert gap <= 1e-8
    rows = read_rows_csv(tmp_path / "lyapunov.csv")
    diffs = [abs(float(r["log_phi"]) - float(r["oracle"])) for r in rows]
    assert max(diffs) <= 1e-8


def test_lyapunov_zero_range(tmp_path):
    main(["lyapunov", "--d", "4", "--z-max", "0", "--out", str(tmp_path)])
    rows = read_rows_csv(tmp_path / "lyapunov.csv")
    assert len(rows) == 1
    assert float(rows[0]["z"]) == 0.0 and float(rows[0]["log_phi"]) == 0.0


def test_lyapunov_bad_dimension(tmp_path):
    assert main(["lyapunov", "--d", "0", "--out", str(tmp_path)]) == 2


def test_envelope_both_kinds(tmp_path):
    out = tmp_path / "o"
    assert main(["envelope", "--out", str(out), "--deltas", "0.1", "0.01"]) == 0
    rows = read_rows_csv(out / "envelope.csv")
    assert {r["kind"] for r in rows} == {"subgaussian", "subexponential"}
    summary = json.loads((out / "envelope.json").read_text())
    assert [t["kind"] for t in summary["tighter"]] == ["subgaussian", "subgaussian"]
    assert summary["constants"]["subgaussian"]["c"] == pytest.approx(0.9)


def test_envelope_huber(tmp_path):
    cfg = _write(tmp_path, {"potential": {"kind": "huber", "beta": 0.5},
                            "chain": {"eta": 1.0}})
    assert main(["envelope", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_rows_csv(tmp_path / "o" / "envelope.csv")
    assert {r["kind"] for r in rows} == {"subexponential"}
    pairs = sorted((float(r["delta"]), float(r["radius"])) for r in rows)
    radii = [r for _, r in pairs]
    assert radii == sorted(radii, reverse=True)


def test_every_output_has_provenance(tmp_path):
    out = tmp_path / "o"
    main(["sample", "--out", str(out), "--seed", "4"])
    main(["verify", "--kind", "lemmas", "--out", str(out), "--seed", "4"])
    main(["envelope", "--out", str(out), "--seed", "4"])
    main(["lyapunov", "--d", "2", "--out", str(out), "--seed", "4"])
    for csv in out.glob("*.csv"):
        assert csv.read_text().startswith("# seed=4 config_digest="), csv.name
    for js in out.glob("*.json"):
        payload = json.loads(js.read_text())
        assert payload["seed"] == 4 and payload["config_digest"], js.name


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "langevin_tails", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "lyapunov" in res.stdout
