"""CSV and JSON exports.

Every CSV starts with one ``#`` provenance line carrying the master seed and
the config digest, followed by the header row.  Readers skip lines starting
with ``#`` (``pandas.read_csv(..., comment="#")`` works as well).
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance_line(seed, digest) -> str:
    return f"# seed={seed} config_digest={digest}\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def write_ensemble_csv(ens, path, seed, digest) -> None:
    d = ens.samples.shape[1]
    header = ",".join(["chain", "record"] + [f"x_{j}" for j in range(d)])
    table = np.column_stack([ens.chain, ens.record, ens.samples])
    with open(path, "w", newline="") as f:
        f.write(provenance_line(seed, digest))
        np.savetxt(f, table, fmt=["%d", "%d"] + ["%.17g"] * d, delimiter=",",
                   header=header, comments="")


def read_ensemble_csv(path):
    """Return ``(chain, record, samples)`` arrays from an ensemble CSV."""
    with open(path) as f:
        skip = 0
        for line in f:
            skip += 1
            if not line.startswith("#"):
                break  # that line was the header
    table = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return table[:, 0].astype(np.int64), table[:, 1].astype(np.int64), table[:, 2:]


def write_rows_csv(path, rows, fieldnames, seed, digest) -> None:
    with open(path, "w", newline="") as f:
        f.write(provenance_line(seed, digest))
        w = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in fieldnames})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_rows_csv(path):
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    return list(csv.DictReader(lines))
