"""Energy accounting, efficiency metrics, and impact-rate diagnostics.

The ledger splits the initial energy E0 = x1_0**2 + v1_0**2 + eps*v2_0**2
(unhalved units) into four normalized channels at every sample:

    e_mech  instantaneous mechanical energy (x1**2 + v1**2 + eps*v2**2)/E0
    e_damp  cumulative viscous loss        2*eps*lam*int(v1**2)/E0
    e_coil  cumulative electrical loss     2*c_e*int((v1-v2)**2)/E0
    e_imp   cumulative impact loss         e_imp/E0

Along the smooth flow d(x1**2 + v1**2 + eps*v2**2)/dtau =
-2*eps*lam*v1**2 - 2*c_e*(v1-v2)**2, so the factor 2 on the quadrature
channels is what makes the four shares sum to one exactly; each impact
moves eps*(1-kappa**2)*r**2/(1+eps) from e_mech into e_imp.

The relative-energy ratio e_r = e_mech + e_damp + e_coil counts energy
still in the oscillator plus what left through the non-impact channels;
with x1_0 = 0 and v2_0 = 0 it equals 1 - e_imp identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import DomainError


@dataclass
class EnergyLedger:
    """Normalized energy balance on the trajectory's sample grid."""

    tau: np.ndarray
    e_mech: np.ndarray
    e_damp: np.ndarray
    e_coil: np.ndarray
    e_imp: np.ndarray
    e_r: np.ndarray
    E0: float

    def closure_residual(self) -> np.ndarray:
        return self.e_mech + self.e_damp + self.e_coil + self.e_imp - 1.0


@dataclass(frozen=True)
class EfficiencyReport:
    """Scalar performance figure over a horizon.

    dissipation_fraction: percent of E0 removed through the sink channels
    (impacts plus coil) by `horizon` — the optimizer's objective.
    time_averaged_er: 100 * mean of e_r over [0, horizon] (trapezoid).
    components = (impact share, coil share) in percent at the horizon.
    """

    mode: str
    value: float
    horizon: float
    components: tuple

    def __post_init__(self):
        if self.mode not in ("dissipation_fraction", "time_averaged_er"):
            raise DomainError(f"unknown efficiency mode {self.mode!r}")


def build_ledger(tr: Trajectory) -> EnergyLedger:
    """Energy balance of a trajectory; requires positive initial energy."""
    p = tr.params
    E0 = tr.initial_energy()
    if E0 <= 0.0:
        raise DomainError("initial energy is zero; ledger undefined")
    mech = tr.x1 ** 2 + tr.v1 ** 2 + p.eps * tr.v2 ** 2
    e_mech = mech / E0
    e_damp = 2.0 * p.eps * p.lam * tr.i_damp / E0
    e_coil = 2.0 * p.c_e * tr.i_coil / E0
    e_imp = tr.e_imp / E0
    e_r = e_mech + e_damp + e_coil
    return EnergyLedger(tau=tr.tau, e_mech=e_mech, e_damp=e_damp,
                        e_coil=e_coil, e_imp=e_imp, e_r=e_r, E0=E0)


def _interp_channel(tau_grid: np.ndarray, values: np.ndarray,
                    tau: float) -> float:
    """Linear interpolation that is right-continuous across the duplicated
    pre/post rows at impact instants."""
    i = int(np.searchsorted(tau_grid, tau, side="right"))
    if i == 0:
        raise DomainError(f"tau={tau} precedes the ledger grid")
    if i >= len(tau_grid):
        if tau > tau_grid[-1] + 1e-9:
            raise DomainError(f"tau={tau} beyond the ledger horizon")
        return float(values[-1])
    t0, t1 = tau_grid[i - 1], tau_grid[i]
    if t1 == t0:
        return float(values[i])
    f = (tau - t0) / (t1 - t0)
    return float(values[i - 1] + f * (values[i] - values[i - 1]))


def relative_energy(ledger: EnergyLedger, tau: float) -> float:
    """e_r at a given time; right-continuous at impacts."""
    return _interp_channel(ledger.tau, ledger.e_r, tau)


def efficiency(tr: Trajectory, mode: str = "dissipation_fraction",
               horizon: float | None = None) -> EfficiencyReport:
    """Performance figure over [0, horizon] (defaults to the full run)."""
    if horizon is None:
        horizon = tr.t_end
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    if horizon > tr.t_end + 1e-9:
        raise DomainError("horizon exceeds the simulated span")
    led = build_ledger(tr)
    imp_share = 100.0 * _interp_channel(led.tau, led.e_imp, horizon)
    coil_share = 100.0 * _interp_channel(led.tau, led.e_coil, horizon)
    if mode == "dissipation_fraction":
        value = imp_share + coil_share
    elif mode == "time_averaged_er":
        m = led.tau <= horizon + 1e-12
        t = led.tau[m]
        y = led.e_r[m]
        if t[-1] < horizon - 1e-9:
            t = np.append(t, horizon)
            y = np.append(y, relative_energy(led, horizon))
        value = 100.0 * float(np.trapezoid(y, t)) / horizon
    else:
        raise DomainError(f"unknown efficiency mode {mode!r}")
    return EfficiencyReport(mode=mode, value=value, horizon=horizon,
                            components=(imp_share, coil_share))


def harvested_energy(tr: Trajectory, r_load: float, r_coil: float) -> float:
    """Fraction of E0 delivered to the load resistance.

    Total electrical dissipation splits between load and coil in proportion
    to their resistances (series circuit, same current)."""
    if r_load < 0.0 or r_coil < 0.0:
        raise DomainError("resistances must be nonnegative")
    total = r_load + r_coil
    if total <= 0.0:
        raise DomainError("total circuit resistance must be positive")
    led = build_ledger(tr)
    return float(led.e_coil[-1]) * r_load / total


def cycle_starts(tr: Trajectory, min_period: float = 0.5) -> np.ndarray:
    """Times of upward zero crossings of x1 on the uniform grid.

    Crossings closer than min_period to the previous one are merged (the
    short cycle is absorbed into its predecessor).  A start at tau=0 is
    included when the motion begins at x1=0 moving upward."""
    tau, st = tr.uniform()
    x1 = st[:, 0]
    starts = []
    if len(tau) and abs(x1[0]) < 1e-12 and st[0, 1] > 0.0:
        starts.append(float(tau[0]))
    for i in range(1, len(x1)):
        if x1[i - 1] < 0.0 <= x1[i]:
            f = x1[i - 1] / (x1[i - 1] - x1[i])
            t = float(tau[i - 1] + f * (tau[i] - tau[i - 1]))
            if starts and t - starts[-1] < min_period:
                continue
            starts.append(t)
    return np.array(starts)


def bin_impacts_by_cycle(starts: np.ndarray,
                         impact_taus: np.ndarray) -> list:
    """Count impacts in each complete cycle [starts[k], starts[k+1])."""
    out = []
    for k in range(len(starts) - 1):
        n = int(np.sum((impact_taus >= starts[k]) &
                       (impact_taus < starts[k + 1])))
        out.append((k, n))
    return out


def impacts_per_cycle(tr: Trajectory) -> list:
    """(cycle index, impact count) for every complete oscillator cycle."""
    starts = cycle_starts(tr)
    if len(starts) < 2:
        return []
    return bin_impacts_by_cycle(starts, tr.impact_taus)
