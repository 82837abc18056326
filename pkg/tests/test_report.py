"""Report writers: formatting, hashing, bundles, row builders."""

import json
import struct

import numpy as np
import pytest

from vines import ConfigError
from vines.report import (cdf_rows, fmt_float, histogram_rows, open_bundle,
                          sha256_file, series_rows, write_csv, write_json)


def test_fmt_float_round_trips_float64():
    rng = np.random.default_rng(3)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert struct.pack("<d", float(fmt_float(x))) == struct.pack("<d", x)
    assert fmt_float(float("nan")) == "nan"
    assert fmt_float(float("inf")) == "inf"
    assert fmt_float(float("-inf")) == "-inf"
    assert fmt_float(0.1) == "0.10000000000000001"


def test_write_csv_typed_header_and_line_endings(tmp_path):
    p = write_csv(tmp_path / "t.csv",
                  [("tau", "float"), ("n", "int"), ("label", "str")],
                  [(0.1, 3, "plain"), (float("nan"), -1, 'quote"me,now')])
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "tau:float,n:int,label:str"
    assert lines[1] == "0.10000000000000001,3,plain"
    assert lines[2] == 'nan,-1,"quote""me,now"'
    with pytest.raises(ConfigError):
        write_csv(tmp_path / "bad.csv", [("x", "complex")], [(1,)])


def test_write_json_canonical_form(tmp_path):
    p = write_json(tmp_path / "t.json",
                   {"zeta": np.float64(1.5), "alpha": [np.int64(2)],
                    "gap": float("nan")})
    raw = p.read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw
    text = raw.decode("utf-8")
    assert text.index('"alpha"') < text.index('"gap"') < text.index('"zeta"')
    data = json.loads(text)
    assert data == {"alpha": [2], "gap": None, "zeta": 1.5}


def test_sha256_file_matches_known_digest(tmp_path):
    f = tmp_path / "x.bin"
    f.write_bytes(b"abc")
    assert sha256_file(f) == ("ba7816bf8f01cfea414140de5dae2223"
                              "b00361a396177a9cb410ff61f20015ad")


def test_bundle_manifest_lists_and_hashes_all_files(tmp_path):
    b = open_bundle(tmp_path / "run", "simulate")
    b.csv("series", [("x", "float")], [(1.0,), (2.0,)])
    b.json("summary", {"ok": True})
    mpath = b.finalize({"seed": 5}, seed=5)
    man = json.loads(mpath.read_text())
    assert man["command"] == "simulate"
    assert man["config"] == {"seed": 5}
    assert man["seed"] == 5
    assert set(man["files"]) == {"series.csv", "summary.json"}
    for name, digest in man["files"].items():
        assert sha256_file(tmp_path / "run" / name) == digest
    assert {"python", "numpy", "scipy", "numba", "matplotlib",
            "vines"} <= set(man["versions"])
    assert isinstance(man["wall_time_s"], float) or isinstance(
        man["wall_time_s"], int)


def test_open_bundle_force_semantics(tmp_path):
    d = tmp_path / "out"
    d.mkdir()
    (d / "stale.txt").write_text("x")
    with pytest.raises(ConfigError):
        open_bundle(d, "simulate")
    open_bundle(d, "simulate", force=True)
    f = tmp_path / "plainfile"
    f.write_text("x")
    with pytest.raises(ConfigError):
        open_bundle(f, "simulate")
    nested = tmp_path / "a" / "b" / "c"
    assert open_bundle(nested, "sweep").out_dir == nested
    assert nested.is_dir()


def test_histogram_rows_partition_the_samples():
    rng = np.random.default_rng(1)
    matrix = np.vstack([rng.uniform(0, 100, 500),
                        rng.uniform(-5, 120, 500)])  # clamped into range
    rows = histogram_rows(matrix, ["a", "b"])
    assert len(rows) == 2 * 20
    for label in ("a", "b"):
        mine = [r for r in rows if r[0] == label]
        assert sum(r[3] for r in mine) == 500
        assert mine[0][1] == 0.0 and mine[-1][2] == 100.0
        widths = {round(r[2] - r[1], 9) for r in mine}
        assert widths == {5.0}


def test_cdf_rows_monotone_and_clustered():
    rng = np.random.default_rng(2)
    n = 300
    v10 = rng.uniform(0.1, 1.0, n)
    matrix = rng.uniform(0, 100, (1, n))
    edges = (0.4, 0.7)
    rows = cdf_rows(matrix, ["only"], v10, edges)
    by_cluster = {}
    for _, cname, eff, cp in rows:
        by_cluster.setdefault(cname, []).append((eff, cp))
    assert set(by_cluster) == {"all", "low", "mid", "high"}
    assert len(by_cluster["all"]) == n
    assert (len(by_cluster["low"]) + len(by_cluster["mid"])
            + len(by_cluster["high"])) == n
    assert len(by_cluster["low"]) == int(np.sum(v10 < 0.4))
    for pts in by_cluster.values():
        effs = [e for e, _ in pts]
        cps = [c for _, c in pts]
        assert effs == sorted(effs)
        assert all(b > a for a, b in zip(cps, cps[1:]))
        assert cps[-1] == pytest.approx(1.0)


def test_series_rows_kind_labels():
    tau = np.array([0.0, 0.5, 0.5, 1.0])
    phase = np.array([0, 1, 2, 4])
    rows = series_rows(tau, phase, [("x1", np.array([1.0, 2.0, 3.0, 4.0])),
                                    ("v1", np.array([5.0, 6.0, 7.0, 8.0]))])
    assert len(rows) == 8
    assert rows[0] == (0, 0.0, "grid", "x1", 1.0)
    assert rows[2][2] == "pre" and rows[4][2] == "post"
    assert rows[6][2] == "end"
    assert rows[3] == (1, 0.5, "pre", "v1", 6.0)
