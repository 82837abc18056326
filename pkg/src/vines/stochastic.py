"""Monte Carlo uncertainty propagation for the sink-design problem.

Design variables (restitution, cavity length, coil coefficient) carry
independent Gaussian manufacturing scatter around their nominal means;
the host oscillator's initial velocity is an uncontrollable uniform
aleatory input.  Draws come from counter-based Philox substreams keyed
by (root_seed, sample_index, variable id), so the value of any draw is a
pure function of those three integers: common random numbers hold across
designs and across any evaluation order or thread count.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ._core import batch_dissipation
from .dynamics import (CLOSE_GAP, GAP_TOL, GRAZE_EPS, MAX_CLOSE, MAX_IMPACTS,
                       MAX_STEP, SimState, SystemParams)
from .errors import DomainError, SimulationError

logger = logging.getLogger(__name__)

#: Default per-variable manufacturing SD on (restitution, cavity, coil).
DEFAULT_DESIGN_SD = 2.97e-3

#: Design variables are clamped to this interval after perturbation.
CLAMP_LO = 0.001
CLAMP_HI = 1.0

# Substream variable ids.
_VAR_KAPPA = 0
_VAR_LC = 1
_VAR_CE = 2
_VAR_V1 = 3

# Fast-path integrator tolerances for Monte Carlo batches.
MC_RTOL = 1e-8
MC_ATOL = 1e-10

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DesignPoint:
    """Nominal design means for (restitution, cavity length, coil coeff)."""

    mu_kappa: float
    mu_Lc: float
    mu_ce: float

    def __post_init__(self):
        for name, v in (("mu_kappa", self.mu_kappa), ("mu_Lc", self.mu_Lc),
                        ("mu_ce", self.mu_ce)):
            if not (CLAMP_LO <= v <= CLAMP_HI):
                raise DomainError(
                    f"{name}={v} outside design bounds "
                    f"[{CLAMP_LO}, {CLAMP_HI}]")

    def as_array(self) -> np.ndarray:
        return np.array([self.mu_kappa, self.mu_Lc, self.mu_ce])


@dataclass(frozen=True)
class UncertaintyModel:
    """Scatter model: Gaussian design noise + uniform initial velocity.

    aleatory = (lo, hi) bounds of the initial-velocity distribution; equal
    bounds collapse it to a point mass (the deterministic-design mode).
    fixed = (mass ratio, damping ratio) held exactly.  Initial positions
    are deterministic."""

    design_sd: float = DEFAULT_DESIGN_SD
    aleatory: tuple = (0.1, 1.0)
    fixed: tuple = (0.05, 0.2)
    x1_0: float = 0.0
    x2_0: float = 0.97

    def __post_init__(self):
        if self.design_sd < 0.0:
            raise DomainError("design_sd must be nonnegative")
        lo, hi = self.aleatory
        if lo > hi:
            raise DomainError("aleatory bounds must satisfy lo <= hi")
        eps, lam = self.fixed
        if eps <= 0.0 or lam < 0.0:
            raise DomainError("fixed (mass ratio, damping) invalid")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo summary of the efficiency objective (percent units)."""

    mean: float
    sigma: float
    ci95: tuple
    n: int
    seed: int
    n_failed: int = 0


def ci95_interval(mean: float, sigma: float, n: int) -> tuple:
    """Normal-theory 95% confidence interval for the mean."""
    if n < 1:
        raise DomainError("need n >= 1 for a confidence interval")
    half = 1.96 * sigma / np.sqrt(n)
    return (mean - half, mean + half)


def estimate_from_values(values: np.ndarray, seed: int,
                         n_failed: int = 0) -> McEstimate:
    """Summary statistics of per-sample efficiencies (SD uses n-1)."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        raise DomainError("need at least 2 samples for an estimate")
    mean = float(np.mean(values))
    sigma = float(np.std(values, ddof=1))
    return McEstimate(mean=mean, sigma=sigma,
                      ci95=ci95_interval(mean, sigma, n),
                      n=n, seed=seed, n_failed=n_failed)


def _substream(root_seed: int, sample_index: int, var_id: int):
    key = np.array([root_seed & _MASK64,
                    ((sample_index << 3) | var_id) & _MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# Bounded cache of base draws: the standard normals and uniforms depend
# only on (n, root_seed), so all designs in a CRN comparison share them.
_draw_cache: OrderedDict = OrderedDict()
_DRAW_CACHE_MAX = 16


def base_draws(n: int, root_seed: int):
    """(z, u): n x 3 standard normals and n uniforms on [0,1), per stream.

    Row i is reproducible in isolation: draw i does not depend on n or on
    any other row."""
    key = (int(n), int(root_seed))
    hit = _draw_cache.get(key)
    if hit is not None:
        _draw_cache.move_to_end(key)
        return hit
    z = np.empty((n, 3))
    u = np.empty(n)
    for i in range(n):
        for v in (_VAR_KAPPA, _VAR_LC, _VAR_CE):
            z[i, v] = _substream(root_seed, i, v).standard_normal()
        u[i] = _substream(root_seed, i, _VAR_V1).random()
    z.flags.writeable = False
    u.flags.writeable = False
    _draw_cache[key] = (z, u)
    if len(_draw_cache) > _DRAW_CACHE_MAX:
        _draw_cache.popitem(last=False)
    return z, u


def sample_design_arrays(d: DesignPoint, u: UncertaintyModel, n: int,
                         root_seed: int):
    """Vectorized perturbed parameters: (kappa, Lc, ce, v1_0) arrays."""
    z, uni = base_draws(n, root_seed)
    kappa = np.clip(d.mu_kappa + u.design_sd * z[:, _VAR_KAPPA],
                    CLAMP_LO, CLAMP_HI)
    lc = np.clip(d.mu_Lc + u.design_sd * z[:, _VAR_LC], CLAMP_LO, CLAMP_HI)
    ce = np.clip(d.mu_ce + u.design_sd * z[:, _VAR_CE], CLAMP_LO, CLAMP_HI)
    lo, hi = u.aleatory
    v10 = lo + (hi - lo) * uni
    return kappa, lc, ce, v10


def sample_inputs(d: DesignPoint, u: UncertaintyModel, sample_index: int,
                  root_seed: int):
    """One Monte Carlo realization: (SystemParams, initial SimState).

    The aleatory draw depends only on (root_seed, sample_index), never on
    the design point — the common-random-numbers contract."""
    kappa, lc, ce, v10 = sample_design_arrays(d, u, sample_index + 1,
                                              root_seed)
    i = sample_index
    eps, lam = u.fixed
    params = SystemParams(eps=eps, lam=lam, c_e=float(ce[i]),
                          kappa=float(kappa[i]), L_c=float(lc[i]))
    state = SimState(tau=0.0, x1=u.x1_0, v1=float(v10[i]), x2=u.x2_0,
                     v2=0.0)
    return params, state


def evaluate_batch(kappa, lc, ce, v10, u: UncertaintyModel,
                   horizon: float, rtol: float = MC_RTOL,
                   atol: float = MC_ATOL) -> np.ndarray:
    """Dissipation-fraction efficiency (percent) per sample; NaN = failed."""
    eps, lam = u.fixed
    n = len(v10)
    eff = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    batch_dissipation(np.ascontiguousarray(kappa, dtype=np.float64),
                      np.ascontiguousarray(lc, dtype=np.float64),
                      np.ascontiguousarray(ce, dtype=np.float64),
                      np.ascontiguousarray(v10, dtype=np.float64),
                      eps, lam, u.x1_0, u.x2_0, 0.0, horizon,
                      rtol, atol, MAX_STEP, GAP_TOL, GRAZE_EPS, CLOSE_GAP,
                      MAX_CLOSE, MAX_IMPACTS, eff, status)
    eff[status != 0] = np.nan
    eff[~np.isfinite(eff)] = np.nan
    return eff


def mc_estimate(d: DesignPoint, u: UncertaintyModel, n: int,
                root_seed: int, horizon: float = 30.0, *,
                evaluator=None, rtol: float = MC_RTOL,
                atol: float = MC_ATOL) -> McEstimate:
    """Monte Carlo mean/SD/CI of the efficiency objective.

    evaluator(kappa, lc, ce, v10, u, horizon) -> efficiency array (NaN for
    failed samples) may be injected for testing; the default integrates
    the full hybrid dynamics.  More than 5% failures rejects the estimate.
    """
    if n < 2:
        raise DomainError("need n >= 2 Monte Carlo samples")
    kappa, lc, ce, v10 = sample_design_arrays(d, u, n, root_seed)
    if evaluator is None:
        eff = evaluate_batch(kappa, lc, ce, v10, u, horizon, rtol, atol)
    else:
        eff = np.asarray(evaluator(kappa, lc, ce, v10, u, horizon),
                         dtype=float)
    ok = np.isfinite(eff)
    n_failed = int(n - ok.sum())
    if n_failed > 0:
        logger.warning("mc_estimate: %d/%d samples failed", n_failed, n)
    if n_failed > 0.05 * n:
        raise SimulationError(
            f"Monte Carlo estimate rejected: {n_failed}/{n} samples failed")
    return estimate_from_values(eff[ok], seed=root_seed, n_failed=n_failed)


def compare_designs(designs, u: UncertaintyModel, n: int, root_seed: int,
                    horizon: float = 30.0, *, evaluator=None,
                    rtol: float = MC_RTOL, atol: float = MC_ATOL):
    """Evaluate several designs on identical aleatory draws.

    Returns (list of McEstimate, efficiency matrix) with matrix[i, j] the
    efficiency of design i on sample j (NaN where the sample failed)."""
    designs = list(designs)
    if not designs:
        raise DomainError("need at least one design to compare")
    matrix = np.empty((len(designs), n))
    estimates = []
    for i, d in enumerate(designs):
        kappa, lc, ce, v10 = sample_design_arrays(d, u, n, root_seed)
        if evaluator is None:
            eff = evaluate_batch(kappa, lc, ce, v10, u, horizon, rtol, atol)
        else:
            eff = np.asarray(evaluator(kappa, lc, ce, v10, u, horizon),
                             dtype=float)
        matrix[i] = eff
        ok = np.isfinite(eff)
        n_failed = int(n - ok.sum())
        if n_failed > 0.05 * n:
            raise SimulationError(
                f"design {i}: {n_failed}/{n} samples failed")
        if n == 1:  # degenerate run: spread is undefined, not zero
            estimates.append(McEstimate(
                mean=float(eff[0]), sigma=float("nan"),
                ci95=(float("nan"), float("nan")), n=1, seed=root_seed,
                n_failed=n_failed))
        else:
            estimates.append(estimate_from_values(eff[ok], seed=root_seed,
                                                  n_failed=n_failed))
    return estimates, matrix


def aleatory_draws(u: UncertaintyModel, n: int, root_seed: int) -> np.ndarray:
    """The shared initial-velocity draws (for clustering/report axes)."""
    _, uni = base_draws(n, root_seed)
    lo, hi = u.aleatory
    return lo + (hi - lo) * uni
