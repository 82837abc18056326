"""Hybrid dynamics of a damped linear oscillator with a vibro-impact
absorber and an electromagnetic transduction coil.

All quantities are nondimensional: displacements are scaled by a reference
length, time by the host oscillator's natural frequency (tau = omega * t).
The state of the pair is (x1, v1) for the host mass and (x2, v2) for the
ball, which travels freely inside a cavity of half-length L_c and exchanges
momentum with the host through instantaneous impacts with restitution
coefficient kappa.  Between impacts the host feels viscous damping
(eps * lam) and the electromagnetic force c_e * (v1 - v2); the ball feels
the reaction c_e * (v1 - v2) / eps.

Energy bookkeeping uses unhalved units: E = x1**2 + v1**2 + eps * v2**2.
Along the smooth flow dE/dtau = -2*eps*lam*v1**2 - 2*c_e*(v1-v2)**2, and
each impact removes eps*(1-kappa**2)*(v1-v2)**2/(1+eps).  The integrator
carries the two quadrature channels (i_damp = int v1**2, i_coil =
int (v1-v2)**2) and the accumulated impact loss e_imp alongside the state.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _core
from .errors import DomainError, SimulationError

logger = logging.getLogger(__name__)

# default numerical knobs
RTOL = 1e-10
ATOL = 1e-12
MAX_STEP = 0.25
SAMPLE_DT = 0.01
GAP_TOL = 1e-10
GRAZE_EPS = 1e-9
CLOSE_GAP = 1e-9
MAX_CLOSE = 100
MAX_IMPACTS = 1_000_000

STATUS_LABELS = {
    _core.OK: "ok",
    _core.ZENO: "impact budget exhausted",
    _core.UNDERFLOW: "step size underflow",
    _core.NON_FINITE: "non-finite state",
    _core.MAX_STEPS: "step budget exhausted",
}


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters of the host oscillator and coil circuit (SI)."""

    mass_host: float  # kg
    mass_ball: float  # kg
    damping: float  # N s / m
    stiffness: float  # N / m
    coupling: float  # V s / m, electromagnetic coupling of the coil
    r_load: float  # ohm
    r_coil: float  # ohm

    def __post_init__(self):
        if self.mass_host <= 0.0 or self.mass_ball <= 0.0:
            raise DomainError("masses must be positive")
        if self.stiffness <= 0.0:
            raise DomainError("stiffness must be positive")
        if self.damping < 0.0:
            raise DomainError("damping must be nonnegative")
        if self.r_load + self.r_coil <= 0.0:
            raise DomainError("total circuit resistance must be positive")


@dataclass(frozen=True)
class Nondimensional:
    """Dimensionless groups of the coupled system."""

    eps: float  # mass ratio ball / host
    lam: float  # scaled viscous damping
    c_e: float  # scaled electromagnetic damping
    omega: float  # natural frequency (rad/s), kept for unit conversions

    def system_params(self, kappa: float, L_c: float) -> "SystemParams":
        return SystemParams(eps=self.eps, lam=self.lam, c_e=self.c_e,
                            kappa=kappa, L_c=L_c)

    def to_tau(self, t_seconds: float) -> float:
        return t_seconds * self.omega

    def to_seconds(self, tau: float) -> float:
        return tau / self.omega


def nondimensionalize(p: DimensionalParams) -> Nondimensional:
    """Collapse the physical parameters into the dimensionless groups."""
    eps = p.mass_ball / p.mass_host
    omega = math.sqrt(p.stiffness / p.mass_host)
    lam = p.damping / (p.mass_host * omega * eps)
    c_e = p.coupling ** 2 / ((p.r_load + p.r_coil) * p.mass_host * omega)
    return Nondimensional(eps=eps, lam=lam, c_e=c_e, omega=omega)


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless design point of the pair."""

    eps: float
    lam: float
    c_e: float
    kappa: float
    L_c: float

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise DomainError(f"eps must be in (0, 1], got {self.eps}")
        if self.lam < 0.0:
            raise DomainError(f"lam must be nonnegative, got {self.lam}")
        if self.c_e < 0.0:
            raise DomainError(f"c_e must be nonnegative, got {self.c_e}")
        if not 0.0 <= self.kappa <= 1.0:
            raise DomainError(f"kappa must be in [0, 1], got {self.kappa}")
        if self.L_c <= 0.0:
            raise DomainError(f"L_c must be positive, got {self.L_c}")


@dataclass(frozen=True)
class SimState:
    """Instantaneous state plus the running energy accumulators."""

    tau: float
    x1: float
    v1: float
    x2: float
    v2: float
    i_damp: float = 0.0
    i_coil: float = 0.0
    e_imp: float = 0.0

    @property
    def gap(self) -> float:
        """Relative displacement x1 - x2 (hits the walls at +-L_c)."""
        return self.x1 - self.x2

    def energy(self, params: SystemParams) -> float:
        """Mechanical energy in unhalved units."""
        return self.x1 ** 2 + self.v1 ** 2 + params.eps * self.v2 ** 2


@dataclass(frozen=True)
class ImpactEvent:
    """One resolved collision with the cavity wall at +-L_c."""

    tau: float
    wall: int  # +1 for the x1 - x2 = +L_c face, -1 for the opposite one
    v1_pre: float
    v2_pre: float
    v1_post: float
    v2_post: float
    energy_loss: float
    grazing: bool = False
    sticking: bool = False
    extra_loss: float = 0.0  # removed by the chattering-guard projection


def rhs(state: SimState, params: SystemParams) -> tuple:
    """Smooth flow between impacts: returns (dx1, dv1, dx2, dv2,
    di_damp, di_coil)."""
    dv = state.v1 - state.v2
    a1 = -state.x1 - params.eps * params.lam * state.v1 - params.c_e * dv
    a2 = params.c_e * dv / params.eps
    return (state.v1, a1, state.v2, a2, state.v1 ** 2, dv ** 2)


def impact_map(v1_pre: float, v2_pre: float,
               params: SystemParams) -> tuple:
    """Instantaneous restitution map.

    Conserves momentum v1 + eps*v2 and reverses the relative velocity
    scaled by kappa; returns (v1_post, v2_post, energy_loss) with the loss
    in unhalved energy units."""
    eps, kappa = params.eps, params.kappa
    r = v1_pre - v2_pre
    P = v1_pre + eps * v2_pre
    v1_post = (P - eps * kappa * r) / (1.0 + eps)
    v2_post = (P + kappa * r) / (1.0 + eps)
    loss = eps * (1.0 - kappa ** 2) * r ** 2 / (1.0 + eps)
    return v1_post, v2_post, loss


def to_com_coordinates(s: "SimState", eps: float) -> tuple:
    """Map a pair state to mass-weighted sum X = x1 + eps*x2 and
    separation w = x1 - x2; returns (X, dX, w, dw).

    The restitution map leaves (X, dX) untouched and scales dw by -kappa,
    which makes this frame convenient for checking impact bookkeeping."""
    return com_arrays(s.x1, s.v1, s.x2, s.v2, eps)


def com_arrays(x1, v1, x2, v2, eps: float) -> tuple:
    """Vectorized form of :func:`to_com_coordinates`."""
    return x1 + eps * x2, v1 + eps * v2, x1 - x2, v1 - v2


def from_com_coordinates(X, dX, w, dw, eps: float) -> tuple:
    """Inverse transform: returns (x1, v1, x2, v2)."""
    x1 = (X + eps * w) / (1.0 + eps)
    x2 = (X - w) / (1.0 + eps)
    v1 = (dX + eps * dw) / (1.0 + eps)
    v2 = (dX - dw) / (1.0 + eps)
    return x1, v1, x2, v2


def coil_coefficient_from_relative(c_rel: float, eps: float) -> float:
    """Convert a coil coefficient expressed as the damping of the *relative*
    coordinate (the term multiplying dw/dtau in the reduced one-equation
    form of the pair dynamics) into the pair-equation coefficient used by
    :class:`SystemParams`.

    The reduced relative equation carries the coil term scaled by
    (1+eps)**1.5/eps relative to the pair form, so the inverse factor
    recovers the pair coefficient."""
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    return c_rel * eps / (1.0 + eps) ** 1.5


@dataclass
class Trajectory:
    """Sampled solution of one run.

    ``states`` has one row per sample with columns
    (x1, v1, x2, v2, i_damp, i_coil, e_imp); ``phase`` tags each row with
    the codes defined in :mod:`vines._core` (0 = uniform grid, 1/2 =
    pre/post impact, 3 = stick release, 4 = off-grid end).  Sample times
    are non-decreasing; pre/post impact rows share the same tau.
    """

    params: SystemParams
    tau: np.ndarray
    states: np.ndarray
    phase: np.ndarray
    impacts: list[ImpactEvent]
    t_end: float
    status: int = _core.OK
    n_graze: int = 0
    n_stick: int = 0
    n_steps: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def x1(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def v1(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def x2(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def v2(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def i_damp(self) -> np.ndarray:
        return self.states[:, 4]

    @property
    def i_coil(self) -> np.ndarray:
        return self.states[:, 5]

    @property
    def e_imp(self) -> np.ndarray:
        return self.states[:, 6]

    @property
    def impact_taus(self) -> np.ndarray:
        return np.array([ev.tau for ev in self.impacts])

    def sample(self, i: int) -> SimState:
        row = self.states[i]
        return SimState(tau=float(self.tau[i]), x1=row[0], v1=row[1],
                        x2=row[2], v2=row[3], i_damp=row[4], i_coil=row[5],
                        e_imp=row[6])

    def final_state(self) -> SimState:
        return self.sample(len(self.tau) - 1)

    def uniform(self) -> tuple:
        """Rows on the uniform sampling grid only."""
        m = self.phase == _core.PH_GRID
        return self.tau[m], self.states[m]

    def initial_energy(self) -> float:
        return self.sample(0).energy(self.params)


def _project_ball(x1: float, x2: float, L_c: float) -> tuple:
    """Clamp the ball into the cavity; returns (x2, moved)."""
    w = x1 - x2
    if w > L_c:
        return x1 - L_c, True
    if w < -L_c:
        return x1 + L_c, True
    return x2, False


def _validate_state(init: SimState):
    for name in ("x1", "v1", "x2", "v2"):
        if not math.isfinite(getattr(init, name)):
            raise DomainError(f"initial {name} is not finite")


def simulate(params: SystemParams, init: SimState, t_end: float, *,
             rtol: float = RTOL, atol: float = ATOL,
             max_step: float = MAX_STEP, sample_dt: float = SAMPLE_DT,
             gap_tol: float = GAP_TOL, graze_eps: float = GRAZE_EPS,
             max_impacts: int = MAX_IMPACTS,
             raise_on_failure: bool = True) -> Trajectory:
    """Integrate the pair from ``init`` to ``t_end`` with event-resolved
    impacts and full energy bookkeeping.

    The ball position is projected onto the nearest cavity wall (with a
    warning) if the initial gap exceeds L_c; no impact is triggered by the
    projection itself unless the relative velocity presses into that wall.
    """
    _validate_state(init)
    if t_end <= init.tau:
        raise DomainError("t_end must exceed the initial tau")
    warn: list[str] = []
    x2, moved = _project_ball(init.x1, init.x2, params.L_c)
    if moved:
        msg = (f"initial ball position {init.x2:.6g} outside the cavity; "
               f"projected to {x2:.6g}")
        logger.warning(msg)
        warn.append(msg)
        init = replace(init, x2=x2)

    y0 = np.array([init.x1, init.v1, init.x2, init.v2,
                   init.i_damp, init.i_coil])
    (status, t, _y, _e, _mode, _n_imp, n_graze, n_stick, n_steps, _n_rej,
     ts, ys, ph, imp) = _core.integrate_core(
        y0, init.e_imp, init.tau, t_end, params.eps, params.lam, params.c_e,
        params.kappa, params.L_c, 0, rtol, atol, max_step, sample_dt,
        True, False, gap_tol, graze_eps, CLOSE_GAP, MAX_CLOSE, max_impacts)

    if status != _core.OK and raise_on_failure:
        raise SimulationError(
            f"integration stopped at tau={t:.6g}: "
            f"{STATUS_LABELS.get(status, status)}")

    events = [ImpactEvent(tau=row[0], wall=int(row[1]), v1_pre=row[2],
                          v2_pre=row[3], v1_post=row[4], v2_post=row[5],
                          energy_loss=row[6], grazing=row[7] != 0.0,
                          sticking=row[8] != 0.0, extra_loss=row[9])
              for row in imp]
    return Trajectory(params=params, tau=ts, states=ys, phase=ph,
                      impacts=events, t_end=t_end, status=status,
                      n_graze=n_graze, n_stick=n_stick, n_steps=n_steps,
                      warnings=warn)


def step_to_event(params: SystemParams, state: SimState,
                  dt_max: float) -> tuple:
    """Advance the smooth flow until the first wall contact or for dt_max.

    Returns ``(state, event)`` where ``state`` is the pre-impact state at
    the contact (the restitution map is *not* applied) and ``event``
    describes what the map would do; ``event`` is None when no contact
    occurs within dt_max."""
    _validate_state(state)
    if dt_max <= 0.0:
        raise DomainError("dt_max must be positive")
    y0 = np.array([state.x1, state.v1, state.x2, state.v2,
                   state.i_damp, state.i_coil])
    (status, t, y, e_imp, _mode, _n_imp, _n_graze, _n_stick, _n_steps,
     _n_rej, _ts, _ys, _ph, imp) = _core.integrate_core(
        y0, state.e_imp, state.tau, state.tau + dt_max, params.eps,
        params.lam, params.c_e, params.kappa, params.L_c, 0, RTOL, ATOL,
        MAX_STEP, -1.0, True, True, GAP_TOL, GRAZE_EPS, CLOSE_GAP,
        MAX_CLOSE, MAX_IMPACTS)
    if status != _core.OK:
        raise SimulationError(
            f"integration stopped at tau={t:.6g}: "
            f"{STATUS_LABELS.get(status, status)}")
    out = SimState(tau=t, x1=y[0], v1=y[1], x2=y[2], v2=y[3],
                   i_damp=y[4], i_coil=y[5], e_imp=e_imp)
    if len(imp) == 0:
        return out, None
    row = imp[0]
    event = ImpactEvent(tau=row[0], wall=int(row[1]), v1_pre=row[2],
                        v2_pre=row[3], v1_post=row[4], v2_post=row[5],
                        energy_loss=row[6], grazing=row[7] != 0.0,
                        sticking=row[8] != 0.0, extra_loss=row[9])
    return out, event
