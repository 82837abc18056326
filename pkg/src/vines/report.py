"""Machine-readable report files: CSV series, JSON scalars, manifests.

All text output is UTF-8 with LF line endings.  Floats are written with
17 significant digits (lossless float64 round trip), so identical inputs
produce byte-identical files on any platform.  Every CSV starts with a
typed header row (``name:type`` cells).  Each run directory gets a
``manifest.json`` holding the fully resolved configuration, the seed,
package versions, wall time, and the SHA-256 of every emitted file; the
embedded configuration is sufficient to rerun the command and reproduce
the files bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

MANIFEST_NAME = "manifest.json"


def fmt_float(x: float) -> str:
    """17-significant-digit decimal form; canonical NaN/inf spellings."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(value, kind: str) -> str:
    if kind == "float":
        return fmt_float(value)
    if kind == "int":
        return str(int(value))
    if kind == "str":
        s = str(value)
        if any(c in s for c in ",\"\n"):
            s = '"' + s.replace('"', '""') + '"'
        return s
    raise ConfigError(f"unknown CSV column type {kind!r}")


def write_csv(path, columns, rows) -> Path:
    """columns: [(name, 'float'|'int'|'str'), ...]; rows: iterable of tuples."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(f"{n}:{k}" for n, k in columns) + "\n")
        for row in rows:
            f.write(",".join(_cell(v, k) for v, (_, k) in
                             zip(row, columns)) + "\n")
    return path


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if np.isnan(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(_jsonify(obj), sort_keys=True, indent=2,
                      ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text + "\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def package_versions() -> dict:
    import matplotlib
    import numba
    import scipy

    from . import __version__
    return {
        "python": ".".join(map(str, sys.version_info[:3])),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "matplotlib": matplotlib.__version__,
        "vines": __version__,
    }


@dataclass
class ReportBundle:
    """A run's output directory plus an index of what was written."""

    out_dir: Path
    command: str
    files: dict = field(default_factory=dict)  # label -> Path
    manifest: dict | None = None
    _t0: float = field(default_factory=time.monotonic)

    def add(self, label: str, path: Path) -> Path:
        self.files[label] = Path(path)
        return self.files[label]

    def csv(self, name: str, columns, rows, label: str | None = None) -> Path:
        return self.add(label or name,
                        write_csv(self.out_dir / f"{name}.csv", columns, rows))

    def json(self, name: str, obj, label: str | None = None) -> Path:
        return self.add(label or name,
                        write_json(self.out_dir / f"{name}.json", obj))

    def path(self, label: str) -> Path:
        return self.files[label]

    def finalize(self, config: dict, seed: int) -> Path:
        """Write the manifest describing (and hashing) everything emitted."""
        hashes = {p.name: sha256_file(p) for p in
                  sorted(self.files.values(), key=lambda p: p.name)}
        self.manifest = {
            "command": self.command,
            "config": _jsonify(config),
            "seed": int(seed),
            "versions": package_versions(),
            "wall_time_s": round(time.monotonic() - self._t0, 3),
            "files": hashes,
        }
        return self.add("manifest",
                        write_json(self.out_dir / MANIFEST_NAME,
                                   self.manifest))


def open_bundle(out_dir, command: str, force: bool = False) -> ReportBundle:
    """Create/validate the output directory for a run."""
    out = Path(out_dir)
    if out.exists():
        if not out.is_dir():
            raise ConfigError(f"output path {out} is not a directory")
        if any(out.iterdir()) and not force:
            raise ConfigError(
                f"output directory {out} is not empty (use --force)")
    else:
        out.mkdir(parents=True)
    return ReportBundle(out_dir=out, command=command)


# ----------------------------------------------------------------------
# Row builders shared by the CLI commands
# ----------------------------------------------------------------------

_KIND_LABEL = {0: "grid", 1: "pre", 2: "post", 3: "release", 4: "end"}

SERIES_COLUMNS = [("sample", "int"), ("tau", "float"), ("kind", "str"),
                  ("variable", "str"), ("value", "float")]


def series_rows(tau, phase, named_channels):
    """Long-format rows (sample, tau, kind, variable, value)."""
    rows = []
    for i in range(len(tau)):
        kind = _KIND_LABEL.get(int(phase[i]), "grid")
        for name, arr in named_channels:
            rows.append((i, tau[i], kind, name, arr[i]))
    return rows


IMPACT_COLUMNS = [("index", "int"), ("tau", "float"), ("wall", "int"),
                  ("v1_pre", "float"), ("v2_pre", "float"),
                  ("v1_post", "float"), ("v2_post", "float"),
                  ("energy_loss", "float"), ("grazing", "int"),
                  ("sticking", "int"), ("extra_loss", "float")]


def impact_rows(impacts):
    return [(i, e.tau, e.wall, e.v1_pre, e.v2_pre, e.v1_post, e.v2_post,
             e.energy_loss, int(e.grazing), int(e.sticking), e.extra_loss)
            for i, e in enumerate(impacts)]


def histogram_rows(matrix, design_labels, bins=20, lo=0.0, hi=100.0):
    """(design, bin_lo, bin_hi, count) over a fixed binning."""
    edges = np.linspace(lo, hi, bins + 1)
    rows = []
    for i, label in enumerate(design_labels):
        vals = matrix[i]
        vals = vals[np.isfinite(vals)]
        counts, _ = np.histogram(np.clip(vals, lo, hi), bins=edges)
        for b in range(bins):
            rows.append((label, edges[b], edges[b + 1], int(counts[b])))
    return rows


HISTOGRAM_COLUMNS = [("design", "str"), ("bin_lo", "float"),
                     ("bin_hi", "float"), ("count", "int")]


def cdf_rows(matrix, design_labels, v10, cluster_edges):
    """(design, cluster, efficiency, cum_prob) per design and velocity band."""
    lo_e, hi_e = cluster_edges
    clusters = {
        "all": np.ones(len(v10), dtype=bool),
        "low": v10 < lo_e,
        "mid": (v10 >= lo_e) & (v10 < hi_e),
        "high": v10 >= hi_e,
    }
    rows = []
    for i, label in enumerate(design_labels):
        for cname, mask in clusters.items():
            vals = matrix[i][mask]
            vals = np.sort(vals[np.isfinite(vals)])
            n = len(vals)
            for k, v in enumerate(vals):
                rows.append((label, cname, v, (k + 1) / n))
    return rows


CDF_COLUMNS = [("design", "str"), ("cluster", "str"),
               ("efficiency", "float"), ("cum_prob", "float")]
