"""Command-line front end.

Subcommands: simulate | sweep | optimize | compare | validate.
Flags: --config <path> --out <dir> --seed <u64> --threads <n> --mode <str>
plus --force (overwrite a non-empty output directory) and --no-plots.

Every run writes CSV/JSON reports plus rendered PNG figures into the
output directory, and a manifest.json whose embedded configuration is a
complete reproduction recipe: ``vines <cmd> --config manifest.json`` re-
creates every CSV/JSON byte for byte.

Exit codes: 0 success; 1 validation-suite failure; 2 configuration error;
3 simulation error; 4 optimization error.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (STATUS_LABELS, SimState, SystemParams,
                       coil_coefficient_from_relative, com_arrays, simulate)
from .energy import (build_ledger, cycle_starts, efficiency,
                     impacts_per_cycle)
from .errors import (ConfigError, DomainError, OptimizationError,
                     SimulationError, VinesError)
from .optimize import (Bounds, FitnessEvaluator, GaConfig, ga_optimize,
                       nsga2_optimize, select_robust)
from .report import (CDF_COLUMNS, HISTOGRAM_COLUMNS, IMPACT_COLUMNS,
                     SERIES_COLUMNS, ReportBundle, cdf_rows, histogram_rows,
                     impact_rows, open_bundle, series_rows)
from .spectral import amplitude_spectrum, cwt_morlet
from .stochastic import (DesignPoint, McEstimate, UncertaintyModel,
                         aleatory_draws, compare_designs, mc_estimate)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_OPTIMIZATION = 4

THREADS_ENV = "VINES_THREADS"


# ----------------------------------------------------------------------
# Configuration handling
# ----------------------------------------------------------------------

_UNCERTAINTY_DEFAULTS = {
    "design_sd": 2.97e-3,
    "aleatory": [0.1, 1.0],
    "eps": 0.05,
    "lam": 0.2,
    "x1_0": 0.0,
    "x2_0": 0.97,
}

DEFAULTS = {
    "simulate": {
        "seed": 0,
        "preset": None,
        "params": {"eps": 0.05, "lam": 0.2, "c_e": 0.05, "kappa": 0.54,
                   "L_c": 0.99, "coil_frame": "direct"},
        "initial": {"x1": 0.0, "v1": 0.5, "x2": 0.97, "v2": 0.0},
        "horizon": 30.0,
        "tolerances": {"rtol": 1e-10, "atol": 1e-12, "max_step": 0.25,
                       "sample_dt": 0.01},
        "outputs": {"spectrum": True, "wavelet": False},
    },
    "sweep": {
        "seed": 0,
        "params": {"eps": 0.05, "lam": 0.2, "kappa": 0.6, "L_c": 1.0,
                   "c_e": 0.05},
        "axes": [
            {"name": "kappa",
             "values": [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]},
            {"name": "c_e", "values": [0.05, 0.3, 0.6, 1.0]},
        ],
        "evaluation": {"mode": "mc", "v1_0": 0.5, "n_mc": 200,
                       "horizon": 30.0, "x1_0": 0.0, "x2_0": 0.97,
                       "aleatory": [0.1, 1.0], "design_sd": 0.0},
    },
    "optimize": {
        "seed": 0,
        "mode": "stochastic",
        "v1_0": 0.55,
        "uncertainty": dict(_UNCERTAINTY_DEFAULTS),
        "bounds": {"kappa": [0.001, 1.0], "Lc": [0.001, 1.0],
                   "ce": [0.001, 1.0]},
        "ga": {"population": 32, "generations": 40, "tournament": 2,
               "crossover_rate": 0.9, "crossover_eta": 15.0,
               "mutation_rate": None, "mutation_sd_fraction": 0.05,
               "elites": 2, "mc_samples": 200, "horizon": 30.0},
        "final_samples": 1000,
        "slack": 0.10,
    },
    "compare": {
        "seed": 0,
        "designs": [
            {"kappa": 0.39, "Lc": 0.68, "ce": 0.013, "label": "robust"},
            {"kappa": 0.54, "Lc": 0.27, "ce": 0.06, "label": "tuned-low"},
            {"kappa": 0.43, "Lc": 0.98, "ce": 0.013, "label": "tuned-mid"},
            {"kappa": 0.25, "Lc": 1.0, "ce": 0.011, "label": "tuned-high"},
        ],
        "uncertainty": dict(_UNCERTAINTY_DEFAULTS),
        "n_mc": 1000,
        "horizon": 30.0,
    },
    "validate": {
        "seed": 0,
        "mode": "full",
        "checks": None,
    },
}

PRESETS = {
    # strongly modulated response with the early two-impacts-per-cycle
    # signature; the coil value is given in the relative-coordinate frame
    "signature": {
        "params": {"eps": 0.05, "lam": 0.2, "c_e": 0.05, "kappa": 0.54,
                   "L_c": 0.99, "coil_frame": "relative"},
        "initial": {"x1": 0.0, "v1": 0.5, "x2": 0.97, "v2": 0.0},
        "horizon": 60.0,
    },
    # undamped host, free ball: first impact solvable in closed form
    "closed-form": {
        "params": {"eps": 0.05, "lam": 0.0, "c_e": 0.0, "kappa": 0.54,
                   "L_c": 0.5, "coil_frame": "direct"},
        "initial": {"x1": 0.0, "v1": 0.5, "x2": -0.25, "v2": 0.0},
        "horizon": 10.0,
    },
    # elastic impacts, no dissipation channels: energy must be conserved
    "conservative": {
        "params": {"eps": 0.05, "lam": 0.0, "c_e": 0.0, "kappa": 1.0,
                   "L_c": 1.0, "coil_frame": "direct"},
        "initial": {"x1": 0.0, "v1": 0.5, "x2": 0.97, "v2": 0.0},
        "horizon": 30.0,
    },
}


def _merge(defaults, user, path=""):
    """Defaults plus user overrides; unknown keys are rejected."""
    if isinstance(defaults, dict):
        if not isinstance(user, dict):
            raise ConfigError(f"config section {path or '<root>'} must be "
                              f"an object, got {type(user).__name__}")
        unknown = set(user) - set(defaults)
        if unknown:
            raise ConfigError(
                f"unknown config key(s) {sorted(unknown)} in "
                f"{path or '<root>'}")
        out = {}
        for k, dv in defaults.items():
            if k in user:
                out[k] = _merge(dv, user[k], f"{path}.{k}" if path else k)
            else:
                out[k] = copy.deepcopy(dv)
        return out
    # leaves and free-form lists (axes/designs/checks) pass through
    return copy.deepcopy(user)


def load_config(command: str, config_path: str | None) -> dict:
    """Resolve the run configuration (defaults < preset < file < flags)."""
    user: dict = {}
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                user = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {config_path} is not valid JSON: "
                              f"{exc}")
        if not isinstance(user, dict):
            raise ConfigError("top-level config must be a JSON object")
        if "command" in user and "config" in user:  # a manifest
            if user["command"] != command:
                raise ConfigError(
                    f"manifest was written by '{user['command']}', "
                    f"not '{command}'")
            user = user["config"]
    defaults = DEFAULTS[command]
    if command == "simulate":
        preset = user.get("preset")
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r}; choose from "
                                  f"{sorted(PRESETS)}")
            base = _merge(defaults, {"preset": preset, **PRESETS[preset]})
            return _merge(base, user)
    return _merge(defaults, user)


def apply_threads(requested: int | None) -> int:
    """Set the worker count (flag > env > all available), clamped."""
    import numba

    available = numba.config.NUMBA_NUM_THREADS
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer")
    n = available if requested is None else max(1, min(requested, available))
    if requested is not None and requested > available:
        logger.warning("requested %d threads, only %d available",
                       requested, available)
    numba.set_num_threads(n)
    return n


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def _system_from_config(p: dict) -> SystemParams:
    frame = p.get("coil_frame", "direct")
    if frame == "direct":
        c_e = p["c_e"]
    elif frame == "relative":
        c_e = coil_coefficient_from_relative(p["c_e"], p["eps"])
    else:
        raise ConfigError(f"coil_frame must be 'direct' or 'relative', "
                          f"got {frame!r}")
    return SystemParams(eps=p["eps"], lam=p["lam"], c_e=c_e,
                        kappa=p["kappa"], L_c=p["L_c"])


def cmd_simulate(cfg: dict, out_dir, *, plots: bool = True,
                 force: bool = False) -> ReportBundle:
    """One trajectory with the full energy/spectral report set."""
    params = _system_from_config(cfg["params"])
    ini = cfg["initial"]
    state = SimState(tau=0.0, x1=ini["x1"], v1=ini["v1"], x2=ini["x2"],
                     v2=ini["v2"])
    tol = cfg["tolerances"]
    bundle = open_bundle(out_dir, "simulate", force)
    tr = simulate(params, state, cfg["horizon"], rtol=tol["rtol"],
                  atol=tol["atol"], max_step=tol["max_step"],
                  sample_dt=tol["sample_dt"])
    led = build_ledger(tr)

    bundle.csv("trajectory", SERIES_COLUMNS, series_rows(
        tr.tau, tr.phase,
        [("x1", tr.x1), ("v1", tr.v1), ("x2", tr.x2), ("v2", tr.v2),
         ("i_damp", tr.i_damp), ("i_coil", tr.i_coil), ("e_imp", tr.e_imp)]))
    bundle.csv("ledger", SERIES_COLUMNS, series_rows(
        led.tau, tr.phase,
        [("e_mech", led.e_mech), ("e_damp", led.e_damp),
         ("e_coil", led.e_coil), ("e_imp", led.e_imp), ("e_r", led.e_r)]))
    bundle.csv("impacts", IMPACT_COLUMNS, impact_rows(tr.impacts))

    X, dX, w, dw = com_arrays(tr.x1, tr.v1, tr.x2, tr.v2, params.eps)
    bundle.csv("com", SERIES_COLUMNS, series_rows(
        tr.tau, tr.phase,
        [("X", X), ("dX", dX), ("w", w), ("dw", dw)]))

    starts = cycle_starts(tr)
    ipc = impacts_per_cycle(tr)
    bundle.csv("impacts_per_cycle",
               [("cycle", "int"), ("start_tau", "float"),
                ("end_tau", "float"), ("count", "int")],
               [(c, starts[c], starts[c + 1], n) for c, n in ipc])

    rep = efficiency(tr)
    bundle.json("efficiency", {
        "mode": rep.mode,
        "value": rep.value,
        "horizon": rep.horizon,
        "components": {"impact_share": rep.components[0],
                       "coil_share": rep.components[1]},
        "relative_energy_final": float(led.e_r[-1]),
        "n_impacts": len(tr.impacts),
        "n_grazing": tr.n_graze,
        "n_sticking": tr.n_stick,
        "status": STATUS_LABELS.get(tr.status, str(tr.status)),
        "warnings": tr.warnings,
    })

    tau_u, st_u = tr.uniform()
    if cfg["outputs"]["spectrum"]:
        freq, mag = amplitude_spectrum(tau_u, st_u[:, 0])
        bundle.csv("spectrum", [("freq", "float"), ("magnitude", "float")],
                   list(zip(freq, mag)))
    if cfg["outputs"]["wavelet"]:
        scales, freqs, W = cwt_morlet(tau_u, st_u[:, 0])
        rows = []
        for j in range(len(scales)):
            for k in range(len(tau_u)):
                rows.append((scales[j], freqs[j], tau_u[k], W[j, k]))
        bundle.csv("wavelet", [("scale", "float"), ("freq", "float"),
                               ("tau", "float"), ("value", "float")], rows)

    if plots:
        from . import plotting
        plotting.plot_trajectory(bundle, tr)
        plotting.plot_velocities(bundle, tr)
        plotting.plot_ledger(bundle, led)
        plotting.plot_phase(bundle, tr.tau, w, dw)
        plotting.plot_impacts_per_cycle(bundle, ipc)
        if cfg["outputs"]["spectrum"]:
            plotting.plot_spectrum(bundle, freq, mag)
        if cfg["outputs"]["wavelet"]:
            plotting.plot_wavelet(bundle, tau_u, freqs, W)

    bundle.finalize(cfg, cfg["seed"])
    return bundle


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------

_AXIS_NAMES = ("kappa", "L_c", "c_e")


def cmd_sweep(cfg: dict, out_dir, *, plots: bool = True,
              force: bool = False) -> ReportBundle:
    """Efficiency over a 2-D grid of design parameters."""
    axes = cfg["axes"]
    if len(axes) != 2:
        raise ConfigError("sweep needs exactly 2 axes")
    names = [a.get("name") for a in axes]
    for a in axes:
        extra = set(a) - {"name", "values"}
        if extra:
            raise ConfigError(f"unknown axis key(s) {sorted(extra)}")
    if (names[0] not in _AXIS_NAMES or names[1] not in _AXIS_NAMES
            or names[0] == names[1]):
        raise ConfigError(f"axes must be two distinct of {_AXIS_NAMES}")
    vals = [np.asarray(a["values"], dtype=float) for a in axes]
    if any(len(v) < 2 for v in vals):
        raise ConfigError("each sweep axis needs at least 2 values")

    ev = cfg["evaluation"]
    if ev["mode"] not in ("mc", "fixed"):
        raise ConfigError("evaluation.mode must be 'mc' or 'fixed'")
    bundle = open_bundle(out_dir, "sweep", force)
    base = dict(cfg["params"])
    grid = np.empty((len(vals[0]), len(vals[1])))
    u = UncertaintyModel(design_sd=ev["design_sd"],
                         aleatory=tuple(ev["aleatory"]),
                         fixed=(base["eps"], base["lam"]),
                         x1_0=ev["x1_0"], x2_0=ev["x2_0"])
    for i, a in enumerate(vals[0]):
        for j, b in enumerate(vals[1]):
            cell = dict(base)
            cell[names[0]] = float(a)
            cell[names[1]] = float(b)
            if ev["mode"] == "mc":
                d = DesignPoint(cell["kappa"], cell["L_c"], cell["c_e"])
                est = mc_estimate(d, u, ev["n_mc"], cfg["seed"],
                                  ev["horizon"])
                grid[i, j] = est.mean
            else:
                p = SystemParams(eps=cell["eps"], lam=cell["lam"],
                                 c_e=cell["c_e"], kappa=cell["kappa"],
                                 L_c=cell["L_c"])
                s0 = SimState(0.0, ev["x1_0"], ev["v1_0"], ev["x2_0"], 0.0)
                tr = simulate(p, s0, ev["horizon"])
                grid[i, j] = efficiency(tr).value

    rows = [(vals[0][i], vals[1][j], grid[i, j])
            for i in range(len(vals[0])) for j in range(len(vals[1]))]
    bundle.csv("sweep", [(names[0], "float"), (names[1], "float"),
                         ("value", "float")], rows)
    i_best = int(np.argmax(grid))
    bi, bj = np.unravel_index(i_best, grid.shape)
    bundle.json("summary", {
        "axes": {names[0]: list(map(float, vals[0])),
                 names[1]: list(map(float, vals[1]))},
        "best": {names[0]: float(vals[0][bi]), names[1]: float(vals[1][bj]),
                 "value": float(grid[bi, bj])},
        "evaluation": ev,
    })
    if plots:
        from . import plotting
        plotting.plot_sweep(bundle, names[0], vals[0], names[1], vals[1],
                            grid)
    bundle.finalize(cfg, cfg["seed"])
    return bundle


# ----------------------------------------------------------------------
# optimize
# ----------------------------------------------------------------------

def _uncertainty_from(cfg_u: dict) -> UncertaintyModel:
    return UncertaintyModel(design_sd=cfg_u["design_sd"],
                            aleatory=tuple(cfg_u["aleatory"]),
                            fixed=(cfg_u["eps"], cfg_u["lam"]),
                            x1_0=cfg_u["x1_0"], x2_0=cfg_u["x2_0"])


def _estimate_json(d: DesignPoint, est: McEstimate) -> dict:
    return {
        "design": {"kappa": d.mu_kappa, "Lc": d.mu_Lc, "ce": d.mu_ce},
        "mean": est.mean,
        "sigma": est.sigma,
        "ci95": list(est.ci95),
        "n": est.n,
        "seed": est.seed,
        "n_failed": est.n_failed,
    }


def cmd_optimize(cfg: dict, out_dir, *, plots: bool = True,
                 force: bool = False) -> ReportBundle:
    """GA design search; the optimum is re-estimated at final_samples."""
    mode = cfg["mode"]
    if mode not in ("stochastic", "deterministic", "nsga2"):
        raise ConfigError("optimize mode must be stochastic, deterministic,"
                          " or nsga2")
    bundle = open_bundle(out_dir, "optimize", force)
    b = Bounds(kappa=tuple(cfg["bounds"]["kappa"]),
               Lc=tuple(cfg["bounds"]["Lc"]),
               ce=tuple(cfg["bounds"]["ce"]))
    ga_cfg = GaConfig(root_seed=cfg["seed"], **cfg["ga"])

    if mode == "deterministic":
        v1 = cfg["v1_0"]
        u = UncertaintyModel(design_sd=0.0, aleatory=(v1, v1),
                             fixed=(cfg["uncertainty"]["eps"],
                                    cfg["uncertainty"]["lam"]),
                             x1_0=cfg["uncertainty"]["x1_0"],
                             x2_0=cfg["uncertainty"]["x2_0"])
    else:
        u = _uncertainty_from(cfg["uncertainty"])

    try:
        ev = FitnessEvaluator(u, ga_cfg)
        if mode == "deterministic":
            res = ga_optimize(ev, b, ga_cfg)
            best = res.best
            if best is None or not np.isfinite(res.best_fitness):
                raise OptimizationError("search produced no finite optimum")
        else:
            res = nsga2_optimize(ev.statistics, b, ga_cfg)
            if not res.pareto:
                raise OptimizationError("empty front")
            best, _, _ = select_robust(res.pareto, cfg["slack"])
        final = mc_estimate(best, u, cfg["final_samples"],
                            cfg["seed"] + 1_000_003, ga_cfg.horizon)
    except SimulationError as exc:
        raise OptimizationError(f"optimization failed: {exc}") from exc

    out = _estimate_json(best, final)
    out["mode"] = mode
    out["n_simulations"] = res.n_simulations
    out["n_evaluations"] = res.n_evaluations
    bundle.json("best_design", out)

    hist_rows = []
    for h in res.history:
        for key, val in h.items():
            if key != "generation":
                hist_rows.append((h["generation"], key, float(val)))
    bundle.csv("ga_history", [("generation", "int"), ("metric", "str"),
                              ("value", "float")], hist_rows)
    if res.pareto is not None:
        bundle.csv("pareto", [("kappa", "float"), ("Lc", "float"),
                              ("ce", "float"), ("mean", "float"),
                              ("sigma", "float")],
                   [(d.mu_kappa, d.mu_Lc, d.mu_ce, m, s)
                    for d, m, s in res.pareto])
    if plots:
        from . import plotting
        plotting.plot_ga_history(bundle, res.history)
        if res.pareto is not None:
            plotting.plot_pareto(bundle, res.pareto)
    bundle.finalize(cfg, cfg["seed"])
    return bundle


# ----------------------------------------------------------------------
# compare
# ----------------------------------------------------------------------

def cmd_compare(cfg: dict, out_dir, *, plots: bool = True,
                force: bool = False) -> ReportBundle:
    """CRN comparison of designs: estimates, histograms, CDFs, cloud."""
    dd = cfg["designs"]
    if len(dd) < 2:
        raise ConfigError("compare needs at least 2 designs")
    labels = []
    designs = []
    for i, entry in enumerate(dd):
        extra = set(entry) - {"kappa", "Lc", "ce", "label"}
        if extra:
            raise ConfigError(f"unknown design key(s) {sorted(extra)}")
        designs.append(DesignPoint(entry["kappa"], entry["Lc"],
                                   entry["ce"]))
        labels.append(entry.get("label", f"design-{i}"))
    if len(set(labels)) != len(labels):
        raise ConfigError("design labels must be unique")

    u = _uncertainty_from(cfg["uncertainty"])
    n = cfg["n_mc"]
    bundle = open_bundle(out_dir, "compare", force)
    ests, matrix = compare_designs(designs, u, n, cfg["seed"],
                                   cfg["horizon"])
    v10 = aleatory_draws(u, n, cfg["seed"])

    lo, hi = u.aleatory
    edges = (lo + (hi - lo) / 3.0, lo + 2.0 * (hi - lo) / 3.0)
    bundle.json("estimates", {
        "designs": [{**_estimate_json(d, e), "label": lbl}
                    for d, e, lbl in zip(designs, ests, labels)],
        "n_samples": n,
        "cluster_rule": "launch-speed terciles",
        "cluster_edges": list(edges),
    })
    rows = [(labels[i], j, v10[j], matrix[i, j])
            for i in range(len(designs)) for j in range(n)]
    bundle.csv("matrix", [("design", "str"), ("sample", "int"),
                          ("v1_0", "float"), ("efficiency", "float")], rows)
    bundle.csv("histograms", HISTOGRAM_COLUMNS,
               histogram_rows(matrix, labels))
    bundle.csv("cdfs", CDF_COLUMNS, cdf_rows(matrix, labels, v10, edges))

    if plots:
        from . import plotting
        plotting.plot_histograms(bundle, matrix, labels)
        plotting.plot_cdfs(bundle, matrix, labels)
        plotting.plot_cloud(bundle, v10, matrix, labels)
    bundle.finalize(cfg, cfg["seed"])
    return bundle


# ----------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------

def cmd_validate(cfg: dict, out_dir, *, plots: bool = True,
                 force: bool = False) -> ReportBundle:
    """Run the acceptance-check registry; write JSON + JUnit reports."""
    from . import validate as val

    bundle = open_bundle(out_dir, "validate", force)
    results = val.run_checks(mode=cfg["mode"], ids=cfg["checks"])
    bundle.json("validation", {
        "n_passed": sum(r.passed for r in results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [{"id": r.id, "name": r.name, "passed": r.passed,
                    "detail": r.detail} for r in results],
    })
    bundle.add("junit", val.write_junit(bundle.out_dir / "junit.xml",
                                        results))
    bundle.finalize(cfg, cfg["seed"])
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.id:2d} {r.name}: "
              f"{r.detail}")
    if any(not r.passed for r in results):
        raise ValidationFailure(f"{sum(not r.passed for r in results)} "
                                f"check(s) failed")
    return bundle


class ValidationFailure(VinesError):
    """At least one acceptance check failed."""


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

_MODE_TARGET = {
    "sweep": ("evaluation", "mode"),
    "optimize": ("mode",),
    "validate": ("mode",),
}

_COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="vines",
        description="Impact-absorber simulation and design toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("simulate", "integrate one trajectory and report energetics"),
            ("sweep", "efficiency over a 2-D design grid"),
            ("optimize", "GA design search (stochastic|deterministic|nsga2)"),
            ("compare", "Monte Carlo comparison of designs"),
            ("validate", "run the acceptance-check suite")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="JSON config (a manifest.json also works)")
        p.add_argument("--out", default=None,
                       help="output directory (default vines-<command>)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the root seed")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (or env {THREADS_ENV})")
        p.add_argument("--mode", default=None,
                       help="command mode where applicable")
        p.add_argument("--force", action="store_true",
                       help="write into a non-empty output directory")
        p.add_argument("--no-plots", action="store_true",
                       help="skip PNG rendering")
    return ap


def _apply_flags(cfg: dict, args) -> dict:
    if args.seed is not None:
        cfg["seed"] = int(args.seed)
    if args.mode is not None:
        target = _MODE_TARGET.get(args.command)
        if target is None:
            raise ConfigError(
                f"--mode is not applicable to '{args.command}'")
        node = cfg
        for k in target[:-1]:
            node = node[k]
        node[target[-1]] = args.mode
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    out_dir = args.out or f"vines-{args.command}"
    try:
        apply_threads(args.threads)
        cfg = _apply_flags(load_config(args.command, args.config), args)
        _COMMANDS[args.command](cfg, out_dir, plots=not args.no_plots,
                                force=args.force)
        return EXIT_OK
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OptimizationError as exc:
        print(f"optimization error: {exc}", file=sys.stderr)
        _write_error_json(out_dir, exc)
        return EXIT_OPTIMIZATION
    except (SimulationError, DomainError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        _write_error_json(out_dir, exc)
        return EXIT_SIMULATION


def _write_error_json(out_dir, exc) -> None:
    try:
        from .report import write_json
        p = Path(out_dir)
        if p.is_dir():
            write_json(p / "error.json", {
                "error": type(exc).__name__,
                "message": str(exc),
            })
    except OSError:
        pass


if __name__ == "__main__":
    sys.exit(main())
