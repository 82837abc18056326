"""End-to-end command-line runs in subprocesses."""

import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

SIM_FILES = {"trajectory.csv", "ledger.csv", "impacts.csv", "com.csv",
             "impacts_per_cycle.csv", "efficiency.json", "spectrum.csv",
             "manifest.json"}


def run_cli(*args, env_extra=None, cwd=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "vines", *args],
                          capture_output=True, text=True, env=env, cwd=cwd)


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def report_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())
            if p.suffix in (".csv", ".json") and p.name != "manifest.json"}


def test_simulate_smoke_with_plots(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form"})
    out = tmp_path / "run"
    r = run_cli("simulate", "--config", cfg, "--out", str(out))
    assert r.returncode == 0, r.stderr
    names = {p.name for p in out.iterdir()}
    assert SIM_FILES <= names
    assert any(n.endswith(".png") for n in names)
    man = json.loads((out / "manifest.json").read_text())
    assert set(man) == {"command", "config", "seed", "versions",
                        "wall_time_s", "files"}
    assert man["command"] == "simulate"
    assert man["config"]["preset"] == "closed-form"
    assert man["config"]["params"]["L_c"] == 0.5
    assert set(man["files"]) == names - {"manifest.json"}
    eff = json.loads((out / "efficiency.json").read_text())
    assert eff["mode"] == "dissipation_fraction"
    assert 0.0 <= eff["value"] <= 100.0
    assert eff["n_impacts"] >= 1


def test_manifest_rerun_reproduces_reports(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": 5.0,
                               "outputs": {"spectrum": False}})
    d1, d2 = tmp_path / "a", tmp_path / "b"
    r1 = run_cli("simulate", "--config", cfg, "--out", str(d1), "--no-plots")
    assert r1.returncode == 0, r1.stderr
    assert not any(p.suffix == ".png" for p in d1.iterdir())
    r2 = run_cli("simulate", "--config", str(d1 / "manifest.json"),
                 "--out", str(d2), "--no-plots")
    assert r2.returncode == 0, r2.stderr
    b1, b2 = report_bytes(d1), report_bytes(d2)
    assert set(b1) == set(b2)
    for name in b1:
        assert b1[name] == b2[name], f"{name} differs between reruns"


def test_manifest_for_wrong_command_is_rejected(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": 5.0})
    d1 = tmp_path / "a"
    assert run_cli("simulate", "--config", cfg, "--out", str(d1),
                   "--no-plots").returncode == 0
    r = run_cli("sweep", "--config", str(d1 / "manifest.json"),
                "--out", str(tmp_path / "b"), "--no-plots")
    assert r.returncode == 2
    assert "manifest" in r.stderr


def test_unknown_config_key_is_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, {"horizonn": 5.0})
    r = run_cli("simulate", "--config", cfg,
                "--out", str(tmp_path / "run"), "--no-plots")
    assert r.returncode == 2
    assert "horizonn" in r.stderr


def test_mode_flag_rejected_where_inapplicable(tmp_path):
    r = run_cli("simulate", "--mode", "fast",
                "--out", str(tmp_path / "run"), "--no-plots")
    assert r.returncode == 2
    assert "--mode" in r.stderr


def test_nonempty_out_dir_needs_force(tmp_path):
    out = tmp_path / "run"
    out.mkdir()
    (out / "keep.txt").write_text("x")
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": 5.0})
    r = run_cli("simulate", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 2
    assert "--force" in r.stderr
    r2 = run_cli("simulate", "--config", cfg, "--out", str(out),
                 "--no-plots", "--force")
    assert r2.returncode == 0, r2.stderr


def test_bad_horizon_is_simulation_error(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": -5.0})
    out = tmp_path / "run"
    r = run_cli("simulate", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 3
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "DomainError"


def test_sweep_fixed_grid(tmp_path):
    cfg = write_cfg(tmp_path, {
        "axes": [{"name": "kappa", "values": [0.3, 0.6]},
                 {"name": "c_e", "values": [0.05, 0.3]}],
        "evaluation": {"mode": "fixed", "v1_0": 0.5, "horizon": 10.0},
    })
    out = tmp_path / "run"
    r = run_cli("sweep", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 0, r.stderr
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 1 + 4  # typed header + one row per grid cell
    header = lines[0].split(",")
    assert header[0].split(":")[0] == "kappa"
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["axes"]) == {"kappa", "c_e"}
    assert summary["best"]["kappa"] in (0.3, 0.6)
    assert 0.0 <= summary["best"]["value"] <= 100.0


def test_sweep_rejects_bad_axes(tmp_path):
    cfg = write_cfg(tmp_path, {"axes": [{"name": "kappa",
                                         "values": [0.3, 0.6]}]})
    r = run_cli("sweep", "--config", cfg, "--out", str(tmp_path / "r"),
                "--no-plots")
    assert r.returncode == 2


def test_optimize_tiny_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, {
        "mode": "deterministic", "v1_0": 0.5,
        "ga": {"population": 4, "generations": 2, "elites": 1,
               "mc_samples": 2, "horizon": 5.0},
        "final_samples": 4,
    })
    out = tmp_path / "run"
    r = run_cli("optimize", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 0, r.stderr
    best = json.loads((out / "best_design.json").read_text())
    for k in ("kappa", "Lc", "ce"):
        assert 0.001 <= best["design"][k] <= 1.0
    hist = (out / "ga_history.csv").read_text().splitlines()
    assert hist[0] == "generation:int,metric:str,value:float"
    assert len(hist) > 2
    # single-objective search: no front, hence no pareto.csv
    assert not (out / "pareto.csv").exists()
    assert best["mode"] == "deterministic"


def test_compare_two_designs(tmp_path):
    cfg = write_cfg(tmp_path, {
        "designs": [{"kappa": 0.39, "Lc": 0.68, "ce": 0.013, "label": "a"},
                    {"kappa": 0.54, "Lc": 0.27, "ce": 0.06, "label": "b"}],
        "n_mc": 16, "horizon": 5.0,
    })
    out = tmp_path / "run"
    r = run_cli("compare", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 0, r.stderr
    est = json.loads((out / "estimates.json").read_text())
    assert est["cluster_rule"] == "launch-speed terciles"
    assert len(est["cluster_edges"]) == 2
    assert {e["label"] for e in est["designs"]} == {"a", "b"}
    rows = (out / "matrix.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 16
    assert (out / "histograms.csv").exists()
    assert (out / "cdfs.csv").exists()


def test_compare_needs_two_designs(tmp_path):
    cfg = write_cfg(tmp_path, {
        "designs": [{"kappa": 0.39, "Lc": 0.68, "ce": 0.013, "label": "a"}],
        "n_mc": 4, "horizon": 5.0,
    })
    r = run_cli("compare", "--config", cfg, "--out", str(tmp_path / "r"),
                "--no-plots")
    assert r.returncode == 2


def test_validate_selected_check(tmp_path):
    cfg = write_cfg(tmp_path, {"checks": [4]})
    out = tmp_path / "run"
    r = run_cli("validate", "--config", cfg, "--out", str(out), "--no-plots")
    assert r.returncode == 0, r.stderr
    assert "[PASS]  4" in r.stdout
    v = json.loads((out / "validation.json").read_text())
    assert v["n_passed"] == 1 and v["n_failed"] == 0
    suite = ET.parse(out / "junit.xml").getroot()
    assert suite.get("tests") == "1" and suite.get("failures") == "0"
    case = suite.find("testcase")
    assert case.get("name").startswith("04-")
    assert case.get("time") is None  # byte-stable reports carry no timings


def test_thread_controls(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": 5.0})
    r1 = run_cli("simulate", "--config", cfg, "--threads", "1",
                 "--out", str(tmp_path / "a"), "--no-plots")
    assert r1.returncode == 0, r1.stderr
    r2 = run_cli("simulate", "--config", cfg,
                 "--out", str(tmp_path / "b"), "--no-plots",
                 env_extra={"VINES_THREADS": "1"})
    assert r2.returncode == 0, r2.stderr
    r3 = run_cli("simulate", "--config", cfg,
                 "--out", str(tmp_path / "c"), "--no-plots",
                 env_extra={"VINES_THREADS": "many"})
    assert r3.returncode == 2


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_cfg(tmp_path, {"preset": "closed-form", "horizon": 5.0,
                               "seed": 1})
    out = tmp_path / "run"
    r = run_cli("simulate", "--config", cfg, "--seed", "77",
                "--out", str(out), "--no-plots")
    assert r.returncode == 0, r.stderr
    man = json.loads((out / "manifest.json").read_text())
    assert man["seed"] == 77 and man["config"]["seed"] == 77
