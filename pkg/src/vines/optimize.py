"""Design optimization: real-coded GA and bi-objective non-dominated sort.

Single-objective mode maximizes the Monte Carlo mean of the dissipation
efficiency over the design means (restitution, cavity length, coil
coefficient).  Bi-objective mode trades mean efficiency (maximized)
against its standard deviation (minimized) with NSGA-II style survival.

Fitness is noisy, so all individuals within one generation share a common
random number seed (fair comparison) and the seed is refreshed every
generation (elites are re-evaluated, preventing lucky-seed lock-in).
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, SimulationError
from .stochastic import DesignPoint, UncertaintyModel, mc_estimate

logger = logging.getLogger(__name__)

_N_VARS = 3
_GA_STREAM = 0x6F70  # substream tag separating GA draws from MC draws


@dataclass(frozen=True)
class Bounds:
    """Per-variable (lo, hi) search box, inside the feasible design domain."""

    kappa: tuple = (0.001, 1.0)
    Lc: tuple = (0.001, 1.0)
    ce: tuple = (0.001, 1.0)

    def __post_init__(self):
        for name, (lo, hi) in (("kappa", self.kappa), ("Lc", self.Lc),
                               ("ce", self.ce)):
            if not (0.001 <= lo < hi <= 1.0):
                raise ConfigError(
                    f"bounds for {name} must satisfy 0.001 <= lo < hi <= 1")

    def lo(self) -> np.ndarray:
        return np.array([self.kappa[0], self.Lc[0], self.ce[0]])

    def hi(self) -> np.ndarray:
        return np.array([self.kappa[1], self.Lc[1], self.ce[1]])


@dataclass(frozen=True)
class GaConfig:
    """Hyperparameters for both optimization modes."""

    population: int = 32
    generations: int = 40
    tournament: int = 2
    crossover_rate: float = 0.9
    crossover_eta: float = 15.0
    mutation_rate: float | None = None  # None -> 1/n_vars
    mutation_sd_fraction: float = 0.05
    elites: int = 2
    root_seed: int = 0
    mc_samples: int = 200
    horizon: float = 30.0

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise ConfigError("population must be even and >= 4")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.tournament < 1:
            raise ConfigError("tournament size must be >= 1")
        for name, r in (("crossover_rate", self.crossover_rate),
                        ("mutation_sd_fraction", self.mutation_sd_fraction)):
            if not (0.0 <= r <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.mutation_rate is not None and not (
                0.0 <= self.mutation_rate <= 1.0):
            raise ConfigError("mutation_rate must lie in [0, 1]")
        if not (0 <= self.elites < self.population):
            raise ConfigError("elites must satisfy 0 <= elites < population")
        if self.mc_samples < 2:
            raise ConfigError("mc_samples must be >= 2")
        if self.horizon <= 0.0:
            raise ConfigError("horizon must be positive")

    @property
    def effective_mutation_rate(self) -> float:
        return (1.0 / _N_VARS if self.mutation_rate is None
                else self.mutation_rate)


@dataclass
class OptimizationResult:
    """Outcome of a run: single best point or Pareto set, plus accounting."""

    best: DesignPoint | None
    best_fitness: float | None
    pareto: list | None
    history: list
    n_simulations: int
    n_evaluations: int


def generation_seed(root_seed: int, generation: int) -> int:
    """CRN seed shared by every evaluation inside one generation."""
    ss = np.random.SeedSequence((int(root_seed), 101, int(generation)))
    return int(ss.generate_state(1, np.uint64)[0])


def _quantize(d: DesignPoint) -> tuple:
    return (round(d.mu_kappa * 1e6), round(d.mu_Lc * 1e6),
            round(d.mu_ce * 1e6))


class FitnessEvaluator:
    """Bridges the GA to the Monte Carlo engine with CRN and caching.

    Calling it returns the mean efficiency; statistics() returns
    (mean, sigma).  Rejected estimates become -inf fitness.  The budget
    counter reports actual simulations run (cache hits are free)."""

    def __init__(self, model: UncertaintyModel | None = None,
                 cfg: GaConfig = GaConfig()):
        self.model = model if model is not None else UncertaintyModel()
        self.cfg = cfg
        self.seed = cfg.root_seed
        self.n_simulations = 0
        self.n_evaluations = 0
        self.cache_hits = 0
        self._cache: OrderedDict = OrderedDict()
        self._cache_max = 4096

    def begin_generation(self, generation: int,
                         seed: int | None = None) -> None:
        self.seed = (generation_seed(self.cfg.root_seed, generation)
                     if seed is None else seed)

    def statistics(self, d: DesignPoint) -> tuple:
        key = (_quantize(d), self.seed)
        hit = self._cache.get(key)
        self.n_evaluations += 1
        if hit is not None:
            self._cache.move_to_end(key)
            self.cache_hits += 1
            return hit
        try:
            est = mc_estimate(d, self.model, self.cfg.mc_samples, self.seed,
                              self.cfg.horizon)
            value = (est.mean, est.sigma)
        except (SimulationError, DomainError) as exc:
            logger.warning("fitness rejected for %s: %s", d, exc)
            value = (-math.inf, math.inf)
        self.n_simulations += self.cfg.mc_samples
        self._cache[key] = value
        if len(self._cache) > self._cache_max:
            self._cache.popitem(last=False)
        return value

    def __call__(self, d: DesignPoint) -> float:
        return self.statistics(d)[0]


def evaluate_fitness(d: DesignPoint, cfg: GaConfig,
                     model: UncertaintyModel | None = None,
                     seed: int | None = None) -> tuple:
    """(mean, sigma) of one design under the config's Monte Carlo budget."""
    ev = FitnessEvaluator(model, cfg)
    if seed is not None:
        ev.seed = seed
    return ev.statistics(d)


def pin_design(objective, mu_kappa: float | None = None,
               mu_Lc: float | None = None, mu_ce: float | None = None):
    """Restrict an objective to a subspace by overriding chosen variables.

    The wrapper forwards the per-generation CRN hook and the budget
    counters, so a pinned run is directly comparable to a free run."""

    class _Pinned:
        def __init__(self, inner):
            self._inner = inner

        def _replace(self, d: DesignPoint) -> DesignPoint:
            return DesignPoint(
                mu_kappa if mu_kappa is not None else d.mu_kappa,
                mu_Lc if mu_Lc is not None else d.mu_Lc,
                mu_ce if mu_ce is not None else d.mu_ce)

        def begin_generation(self, generation, seed=None):
            if hasattr(self._inner, "begin_generation"):
                self._inner.begin_generation(generation, seed)

        def statistics(self, d):
            return self._inner.statistics(self._replace(d))

        def __call__(self, d):
            return self._inner(self._replace(d))

        @property
        def n_simulations(self):
            return getattr(self._inner, "n_simulations", 0)

        @property
        def n_evaluations(self):
            return getattr(self._inner, "n_evaluations", 0)

    return _Pinned(objective)


# ----------------------------------------------------------------------
# Variation operators (shared by both modes)
# ----------------------------------------------------------------------

def _tournament(rng, n: int, fitness_key, size: int) -> int:
    """Index of the winner among `size` uniform picks (first-best ties)."""
    picks = rng.integers(0, n, size=size)
    best = picks[0]
    for i in picks[1:]:
        if fitness_key(i) > fitness_key(best):
            best = i
    return int(best)


def _sbx_pair(rng, p1, p2, eta: float, lo, hi):
    """Simulated binary crossover on one parent pair (per-variable)."""
    c1, c2 = p1.copy(), p2.copy()
    for k in range(len(p1)):
        if rng.random() < 0.5:
            continue
        u = rng.random()
        if u <= 0.5:
            beta = (2.0 * u) ** (1.0 / (eta + 1.0))
        else:
            beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))
        a, b = p1[k], p2[k]
        c1[k] = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b)
        c2[k] = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b)
    return np.clip(c1, lo, hi), np.clip(c2, lo, hi)


def _mutate(rng, x, rate: float, sd: np.ndarray, lo, hi):
    for k in range(len(x)):
        if rng.random() < rate:
            x[k] += rng.normal(0.0, sd[k])
    return np.clip(x, lo, hi)


def _make_offspring(rng, pop, fitness_key, cfg: GaConfig, lo, hi,
                    count: int) -> np.ndarray:
    sd = cfg.mutation_sd_fraction * (hi - lo)
    rate = cfg.effective_mutation_rate
    out = []
    while len(out) < count:
        i = _tournament(rng, len(pop), fitness_key, cfg.tournament)
        j = _tournament(rng, len(pop), fitness_key, cfg.tournament)
        p1, p2 = pop[i].copy(), pop[j].copy()
        if rng.random() < cfg.crossover_rate:
            p1, p2 = _sbx_pair(rng, p1, p2, cfg.crossover_eta, lo, hi)
        out.append(_mutate(rng, p1, rate, sd, lo, hi))
        if len(out) < count:
            out.append(_mutate(rng, p2, rate, sd, lo, hi))
    return np.array(out)


def _init_population(rng, cfg: GaConfig, lo, hi) -> np.ndarray:
    return lo + rng.random((cfg.population, _N_VARS)) * (hi - lo)


def _rng_for(cfg: GaConfig):
    key = np.array([cfg.root_seed & ((1 << 64) - 1), _GA_STREAM],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _owner_attr(objective, name: str, default):
    """Attribute lookup that also sees through bound methods."""
    if hasattr(objective, name):
        return getattr(objective, name)
    owner = getattr(objective, "__self__", None)
    if owner is not None and hasattr(owner, name):
        return getattr(owner, name)
    return default


def _call_hook(objective, generation: int) -> None:
    hook = _owner_attr(objective, "begin_generation", None)
    if hook is not None:
        hook(generation)


def _safe_scalar(objective, d: DesignPoint) -> float:
    try:
        return float(objective(d))
    except (SimulationError, DomainError) as exc:
        logger.warning("objective failed at %s: %s", d, exc)
        return -math.inf


# ----------------------------------------------------------------------
# Single-objective GA
# ----------------------------------------------------------------------

def ga_optimize(objective, bounds: Bounds, cfg: GaConfig) -> OptimizationResult:
    """Maximize a scalar objective over the design box.

    Tournament selection, simulated binary crossover, Gaussian mutation,
    elitism; every individual is (re-)evaluated each generation under that
    generation's shared seed, and the best-ever individual is returned.
    Deterministic given cfg.root_seed."""
    rng = _rng_for(cfg)
    lo, hi = bounds.lo(), bounds.hi()
    pop = _init_population(rng, cfg, lo, hi)
    best_ever = -math.inf
    best_x = pop[0].copy()
    history = []
    for gen in range(cfg.generations):
        _call_hook(objective, gen)
        fit = np.array([_safe_scalar(objective, DesignPoint(*ind))
                        for ind in pop])
        i_best = int(np.argmax(fit))
        if fit[i_best] > best_ever:
            best_ever = float(fit[i_best])
            best_x = pop[i_best].copy()
        finite = fit[np.isfinite(fit)]
        history.append({
            "generation": gen,
            "best": float(fit[i_best]),
            "mean": float(np.mean(finite)) if len(finite) else -math.inf,
            "best_ever": best_ever,
        })
        if gen == cfg.generations - 1:
            break
        order = np.argsort(-fit, kind="stable")
        elite = pop[order[:cfg.elites]].copy()
        kids = _make_offspring(rng, pop, lambda i: fit[i], cfg, lo, hi,
                               cfg.population - cfg.elites)
        pop = np.vstack([elite, kids]) if cfg.elites else kids
    return OptimizationResult(
        best=DesignPoint(*best_x), best_fitness=best_ever, pareto=None,
        history=history,
        n_simulations=_owner_attr(objective, "n_simulations", 0),
        n_evaluations=_owner_attr(objective, "n_evaluations", 0))


# ----------------------------------------------------------------------
# Bi-objective NSGA-II
# ----------------------------------------------------------------------

def _dominates_min(a, b) -> bool:
    """a dominates b in minimization space (<= everywhere, < somewhere)."""
    return (a[0] <= b[0] and a[1] <= b[1]
            and (a[0] < b[0] or a[1] < b[1]))


def fast_nondominated_sort(g: np.ndarray) -> list:
    """Indices grouped into fronts (minimization space)."""
    n = len(g)
    dominated_by = [[] for _ in range(n)]
    n_dominating = np.zeros(n, dtype=int)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if _dominates_min(g[i], g[j]):
                dominated_by[i].append(j)
            elif _dominates_min(g[j], g[i]):
                n_dominating[i] += 1
    fronts = []
    current = [i for i in range(n) if n_dominating[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                n_dominating[j] -= 1
                if n_dominating[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def crowding_distance(g: np.ndarray, front: list) -> np.ndarray:
    dist = np.zeros(len(front))
    pts = g[front]
    for m in range(pts.shape[1]):
        order = np.argsort(pts[:, m], kind="stable")
        span = pts[order[-1], m] - pts[order[0], m]
        dist[order[0]] = dist[order[-1]] = math.inf
        if span <= 0.0 or not np.isfinite(span):
            continue
        for k in range(1, len(order) - 1):
            dist[order[k]] += (pts[order[k + 1], m]
                               - pts[order[k - 1], m]) / span
    return dist


def select_robust(pareto, slack: float = 0.10):
    """Compromise design from a (DesignPoint, mean, sigma) front.

    Satisficing rule: restrict to designs whose mean is within `slack`
    of the front's best mean, then take the lowest spread (ties broken
    by higher mean).  Deterministic, so the stochastic-mode pipeline is
    reproducible end to end."""
    pareto = list(pareto)
    if not pareto:
        raise DomainError("empty front")
    if not (0.0 <= slack < 1.0):
        raise DomainError("slack must lie in [0, 1)")
    best_mean = max(m for _, m, s in pareto)
    eligible = [p for p in pareto if p[1] >= (1.0 - slack) * best_mean]
    return min(eligible, key=lambda p: (p[2], -p[1]))


def is_nondominated_set(points) -> bool:
    """True when no (mean, sigma) pair dominates another in the set."""
    g = np.array([(-m, s) for m, s in points])
    for i in range(len(g)):
        for j in range(len(g)):
            if i != j and _dominates_min(g[i], g[j]):
                return False
    return True


def _eval_biobjective(objectives, pop) -> np.ndarray:
    """Objective pairs mapped to minimization space (-mean, sigma)."""
    g = np.empty((len(pop), 2))
    for i, ind in enumerate(pop):
        try:
            mean, sigma = objectives(DesignPoint(*ind))
        except (SimulationError, DomainError) as exc:
            logger.warning("objectives failed at %s: %s", DesignPoint(*ind),
                           exc)
            mean, sigma = -math.inf, math.inf
        g[i, 0] = -mean
        g[i, 1] = sigma
    return g


def nsga2_optimize(objectives, bounds: Bounds,
                   cfg: GaConfig) -> OptimizationResult:
    """Trade off mean efficiency (max) against its spread (min).

    Standard non-dominated sorting with crowding-distance survival on the
    combined parent+offspring pool; the whole pool is evaluated under each
    generation's shared seed.  Returns the final first front, mutually
    non-dominated and deduplicated."""
    rng = _rng_for(cfg)
    lo, hi = bounds.lo(), bounds.hi()
    pop = _init_population(rng, cfg, lo, hi)
    history = []
    g = None
    for gen in range(cfg.generations):
        _call_hook(objectives, gen)
        g = _eval_biobjective(objectives, pop)  # fresh seed every generation
        fronts = fast_nondominated_sort(g)
        rank = np.empty(len(pop), dtype=int)
        crowd = np.empty(len(pop))
        for r, fr in enumerate(fronts):
            rank[fr] = r
            crowd[fr] = crowding_distance(g, fr)

        means = -g[:, 0]
        finite = means[np.isfinite(means)]
        history.append({
            "generation": gen,
            "best": float(np.max(finite)) if len(finite) else -math.inf,
            "mean": float(np.mean(finite)) if len(finite) else -math.inf,
            "front_size": len(fronts[0]),
        })
        if gen == cfg.generations - 1:
            break

        def key(i):
            return (-rank[i], crowd[i])

        kids = _make_offspring(rng, pop, key, cfg, lo, hi, cfg.population)
        union = np.vstack([pop, kids])
        gu = np.vstack([g, _eval_biobjective(objectives, kids)])
        fronts_u = fast_nondominated_sort(gu)
        chosen = []
        for fr in fronts_u:
            if len(chosen) + len(fr) <= cfg.population:
                chosen.extend(fr)
            else:
                cd = crowding_distance(gu, fr)
                order = sorted(range(len(fr)),
                               key=lambda k: (-cd[k], fr[k]))
                need = cfg.population - len(chosen)
                chosen.extend(fr[k] for k in order[:need])
            if len(chosen) >= cfg.population:
                break
        pop = union[chosen]
        g = gu[chosen]

    fronts = fast_nondominated_sort(g)
    seen = set()
    pareto = []
    for i in sorted(fronts[0]):
        d = DesignPoint(*pop[i])
        q = _quantize(d)
        if q in seen or not np.isfinite(g[i]).all():
            continue
        seen.add(q)
        pareto.append((d, float(-g[i, 0]), float(g[i, 1])))
    # guard: drop anything dominated (duplicate-quantization edge cases)
    pareto = [p for k, p in enumerate(pareto)
              if not any(_dominates_min((-q[1], q[2]), (-p[1], p[2]))
                         for m, q in enumerate(pareto) if m != k)]
    return OptimizationResult(
        best=None, best_fitness=None, pareto=pareto, history=history,
        n_simulations=_owner_attr(objectives, "n_simulations", 0),
        n_evaluations=_owner_attr(objectives, "n_evaluations", 0))
