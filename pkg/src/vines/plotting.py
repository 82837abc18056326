"""Figure rendering for run reports (headless Agg backend, PNG files).

Every CLI command that writes CSV data also renders the matching figures
next to it unless --no-plots is given.  Figures are presentation aids;
the CSVs remain the authoritative machine-readable record.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_DPI = 130


def _save(bundle, name: str, fig) -> None:
    path = bundle.out_dir / f"{name}.png"
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    bundle.add(f"{name}_png", path)


def plot_trajectory(bundle, tr) -> None:
    tau, st = tr.uniform()
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(tau, st[:, 0], lw=1.2, label="host position")
    ax.plot(tau, st[:, 2], lw=0.9, alpha=0.8, label="ball position")
    for t in tr.impact_taus:
        ax.axvline(t, color="0.8", lw=0.5, zorder=0)
    ax.set_xlabel("time")
    ax.set_ylabel("position")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(bundle, "trajectory", fig)


def plot_velocities(bundle, tr) -> None:
    tau, st = tr.uniform()
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(tau, st[:, 1], lw=1.2, label="host velocity")
    ax.plot(tau, st[:, 3], lw=0.9, alpha=0.8, label="ball velocity")
    ax.set_xlabel("time")
    ax.set_ylabel("velocity")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(bundle, "velocities", fig)


def plot_ledger(bundle, led) -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    for name, arr in (("mechanical", led.e_mech), ("damper", led.e_damp),
                      ("coil", led.e_coil), ("impacts", led.e_imp),
                      ("relative energy", led.e_r)):
        ax.plot(led.tau, arr, lw=1.0, label=name)
    ax.set_xlabel("time")
    ax.set_ylabel("energy fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="center right", fontsize=8)
    fig.tight_layout()
    _save(bundle, "ledger", fig)


def plot_phase(bundle, tau, w, dw) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(w, dw, lw=0.6)
    ax.set_xlabel("relative displacement")
    ax.set_ylabel("relative velocity")
    fig.tight_layout()
    _save(bundle, "phase", fig)


def plot_impacts_per_cycle(bundle, ipc) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if ipc:
        ax.bar([c for c, _ in ipc], [n for _, n in ipc], color="#33658a")
    ax.set_xlabel("cycle")
    ax.set_ylabel("impacts")
    fig.tight_layout()
    _save(bundle, "impacts_per_cycle", fig)


def plot_spectrum(bundle, freq, mag) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(freq, np.maximum(mag, 1e-12), lw=1.0)
    ax.set_xlabel("frequency (cycles per time unit)")
    ax.set_ylabel("amplitude")
    ax.set_xlim(0, min(freq[-1], 1.0))
    fig.tight_layout()
    _save(bundle, "spectrum", fig)


def plot_wavelet(bundle, tau, freqs, W) -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    mesh = ax.pcolormesh(tau, freqs, W, shading="auto", cmap="magma")
    ax.set_yscale("log")
    ax.set_xlabel("time")
    ax.set_ylabel("frequency (cycles per time unit)")
    fig.colorbar(mesh, ax=ax, label="|W|")
    fig.tight_layout()
    _save(bundle, "wavelet", fig)


def plot_sweep(bundle, ax1_name, ax1_vals, ax2_name, ax2_vals, grid) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(ax1_vals, ax2_vals, grid.T, shading="auto",
                         cmap="viridis")
    ax.set_xlabel(ax1_name)
    ax.set_ylabel(ax2_name)
    fig.colorbar(mesh, ax=ax, label="efficiency (%)")
    fig.tight_layout()
    _save(bundle, "sweep", fig)


def plot_ga_history(bundle, history) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    gens = [h["generation"] for h in history]
    for key in ("best", "mean", "best_ever"):
        if history and key in history[0]:
            ax.plot(gens, [h[key] for h in history], lw=1.2, label=key)
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.legend()
    fig.tight_layout()
    _save(bundle, "ga_history", fig)


def plot_pareto(bundle, pareto) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    means = [m for _, m, _ in pareto]
    sigs = [s for _, _, s in pareto]
    ax.scatter(means, sigs, s=18, color="#c1292e")
    ax.set_xlabel("mean efficiency (%)")
    ax.set_ylabel("efficiency spread (%)")
    fig.tight_layout()
    _save(bundle, "pareto", fig)


def plot_histograms(bundle, matrix, labels, bins=20, lo=0.0,
                    hi=100.0) -> None:
    edges = np.linspace(lo, hi, bins + 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(labels):
        vals = matrix[i]
        vals = vals[np.isfinite(vals)]
        ax.hist(np.clip(vals, lo, hi), bins=edges, histtype="step", lw=1.3,
                label=label)
    ax.set_xlabel("efficiency (%)")
    ax.set_ylabel("samples")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(bundle, "histograms", fig)


def plot_cdfs(bundle, matrix, labels) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(labels):
        vals = np.sort(matrix[i][np.isfinite(matrix[i])])
        ax.step(vals, np.arange(1, len(vals) + 1) / len(vals),
                where="post", lw=1.3, label=label)
    ax.set_xlabel("efficiency (%)")
    ax.set_ylabel("cumulative probability")
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    _save(bundle, "cdfs", fig)


def plot_cloud(bundle, v10, matrix, labels) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(labels):
        ax.scatter(v10, matrix[i], s=6, alpha=0.5, label=label)
    ax.set_xlabel("initial host velocity")
    ax.set_ylabel("efficiency (%)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(bundle, "cloud", fig)
