"""GA / NSGA-II machinery on synthetic and tiny real objectives."""

import math

import numpy as np
import pytest

from vines import (Bounds, ConfigError, DesignPoint, DomainError,
                   FitnessEvaluator, GaConfig, SimulationError,
                   UncertaintyModel, evaluate_fitness, ga_optimize,
                   is_nondominated_set, nsga2_optimize, pin_design,
                   select_robust)
from vines.optimize import generation_seed


def peak_at_half(d: DesignPoint) -> float:
    x = d.as_array()
    return -float(np.sum((x - 0.5) ** 2))


def tradeoff(d: DesignPoint):
    return (d.mu_kappa, d.mu_kappa)  # high mean costs high spread


def aligned(d: DesignPoint):
    return (d.mu_kappa, 1.0 - d.mu_kappa)  # both objectives favor x -> 1


@pytest.mark.parametrize("kwargs", [
    {"population": 5},
    {"population": 2},
    {"generations": 0},
    {"tournament": 0},
    {"crossover_rate": 1.5},
    {"mutation_rate": -0.2},
    {"mutation_sd_fraction": 2.0},
    {"elites": 32},
    {"mc_samples": 1},
    {"horizon": 0.0},
])
def test_ga_config_rejects_bad_hyperparameters(kwargs):
    with pytest.raises(ConfigError):
        GaConfig(**kwargs)


def test_mutation_rate_defaults_to_one_per_variable():
    assert GaConfig().effective_mutation_rate == pytest.approx(1.0 / 3.0)
    assert GaConfig(mutation_rate=0.2).effective_mutation_rate == 0.2


def test_bounds_guards():
    Bounds(kappa=(0.1, 0.9))
    for bad in ({"kappa": (0.0, 0.9)}, {"Lc": (0.5, 0.5)},
                {"ce": (0.2, 1.1)}, {"kappa": (0.9, 0.1)}):
        with pytest.raises(ConfigError):
            Bounds(**bad)


def test_ga_is_deterministic():
    cfg = GaConfig(population=16, generations=12, root_seed=42)
    r1 = ga_optimize(peak_at_half, Bounds(), cfg)
    r2 = ga_optimize(peak_at_half, Bounds(), cfg)
    assert r1.best == r2.best
    assert r1.best_fitness == r2.best_fitness
    assert r1.history == r2.history


def test_ga_best_ever_is_monotone():
    cfg = GaConfig(population=16, generations=25, root_seed=8)
    res = ga_optimize(peak_at_half, Bounds(), cfg)
    ever = [h["best_ever"] for h in res.history]
    assert len(ever) == 25
    assert all(b >= a for a, b in zip(ever, ever[1:]))
    assert set(res.history[0]) == {"generation", "best", "mean", "best_ever"}


def test_ga_recovers_interior_peak():
    res = ga_optimize(peak_at_half, Bounds(), GaConfig(generations=60,
                                                       root_seed=7))
    assert np.max(np.abs(res.best.as_array() - 0.5)) <= 0.01


def test_ga_recovers_off_center_peak():
    def sphere(d):
        return -float(np.sum((d.as_array() - 0.3) ** 2))

    res = ga_optimize(sphere, Bounds(), GaConfig(root_seed=11))
    assert np.max(np.abs(res.best.as_array() - 0.3)) <= 0.02


def test_ga_survives_raising_objective():
    def spiky(d):
        if d.mu_kappa < 0.5:
            raise SimulationError("unstable region")
        return -((d.mu_kappa - 0.8) ** 2)

    res = ga_optimize(spiky, Bounds(),
                      GaConfig(population=16, generations=20, root_seed=3))
    assert res.best.mu_kappa >= 0.5
    assert math.isfinite(res.best_fitness)
    assert abs(res.best.mu_kappa - 0.8) < 0.2


def test_fitness_evaluator_caches_within_seed():
    cfg = GaConfig(mc_samples=2, horizon=5.0, root_seed=1)
    ev = FitnessEvaluator(UncertaintyModel(), cfg)
    d = DesignPoint(0.5, 0.5, 0.05)
    first = ev.statistics(d)
    assert ev.n_simulations == 2 and ev.cache_hits == 0
    again = ev.statistics(d)
    assert again == first
    assert ev.n_simulations == 2 and ev.cache_hits == 1
    ev.begin_generation(1)
    ev.statistics(d)  # new CRN seed -> fresh simulations
    assert ev.n_simulations == 4
    ev.begin_generation(1)
    ev.statistics(d)  # same generation seed -> cache again
    assert ev.n_simulations == 4 and ev.cache_hits == 2
    assert ev.n_evaluations == 4


def test_generation_seed_is_stable():
    assert generation_seed(0, 3) == generation_seed(0, 3)
    assert generation_seed(0, 3) != generation_seed(0, 4)
    assert generation_seed(1, 3) != generation_seed(0, 3)


def test_evaluate_fitness_matches_evaluator():
    cfg = GaConfig(mc_samples=2, horizon=5.0, root_seed=9)
    d = DesignPoint(0.4, 0.9, 0.02)
    ev = FitnessEvaluator(UncertaintyModel(), cfg)
    assert evaluate_fitness(d, cfg, UncertaintyModel()) == ev.statistics(d)


def test_budget_accounting_on_tiny_real_run():
    cfg = GaConfig(population=4, generations=2, elites=1, mc_samples=2,
                   horizon=5.0, root_seed=13)
    ev = FitnessEvaluator(UncertaintyModel(), cfg)
    res = ga_optimize(ev, Bounds(), cfg)
    assert res.n_evaluations == ev.n_evaluations == 8
    assert res.n_simulations == cfg.mc_samples * (ev.n_evaluations
                                                  - ev.cache_hits)


def test_pin_design_overrides_and_forwards():
    class Stub:
        def __init__(self):
            self.n_simulations = 7
            self.n_evaluations = 0
            self.calls = []
            self.gen = None

        def begin_generation(self, generation, seed=None):
            self.gen = generation

        def statistics(self, d):
            self.calls.append(d)
            self.n_evaluations += 1
            return (d.mu_Lc, 0.0)

        def __call__(self, d):
            return self.statistics(d)[0]

    stub = Stub()
    pinned = pin_design(stub, mu_kappa=0.39, mu_ce=0.013)
    out = pinned.statistics(DesignPoint(0.9, 0.7, 0.9))
    assert stub.calls[-1] == DesignPoint(0.39, 0.7, 0.013)
    assert out == (0.7, 0.0)
    assert pinned(DesignPoint(0.9, 0.25, 0.9)) == 0.25
    pinned.begin_generation(5)
    assert stub.gen == 5
    assert pinned.n_simulations == 7
    assert pinned.n_evaluations == 2


def test_select_robust_satisficing_rule():
    a = (DesignPoint(0.9, 0.9, 0.9), 100.0, 10.0)
    b = (DesignPoint(0.5, 0.5, 0.5), 95.0, 5.0)
    c = (DesignPoint(0.1, 0.1, 0.1), 80.0, 1.0)
    assert select_robust([a, b, c], slack=0.10) is b
    assert select_robust([a, b, c], slack=0.0) is a
    assert select_robust([a, b, c], slack=0.30) is c
    tie_hi = (DesignPoint(0.6, 0.6, 0.6), 100.0, 5.0)
    tie_lo = (DesignPoint(0.7, 0.7, 0.7), 95.0, 5.0)
    assert select_robust([tie_lo, tie_hi]) is tie_hi
    with pytest.raises(DomainError):
        select_robust([])
    with pytest.raises(DomainError):
        select_robust([a], slack=1.0)


def test_is_nondominated_set():
    assert is_nondominated_set([(1.0, 1.0), (2.0, 2.0)])
    assert not is_nondominated_set([(1.0, 1.0), (2.0, 1.0)])
    assert not is_nondominated_set([(2.0, 2.0), (2.0, 1.0)])
    assert is_nondominated_set([(5.0, 3.0)])


def test_nsga2_spans_a_genuine_tradeoff():
    res = nsga2_optimize(tradeoff, Bounds(), GaConfig(root_seed=5))
    assert res.best is None and res.pareto
    means = [m for _, m, _ in res.pareto]
    assert is_nondominated_set([(m, s) for _, m, s in res.pareto])
    assert min(means) <= 0.05
    assert max(means) >= 0.95
    assert set(res.history[0]) == {"generation", "best", "mean",
                                   "front_size"}


def test_nsga2_collapses_aligned_objectives():
    res = nsga2_optimize(aligned, Bounds(), GaConfig(root_seed=5))
    means = np.array([m for _, m, _ in res.pareto])
    sigmas = np.array([s for _, _, s in res.pareto])
    assert np.ptp(means) <= 1e-12  # a single point in objective space
    assert np.min(means) >= 0.95
    assert np.max(sigmas) <= 0.05


def test_nsga2_is_deterministic():
    cfg = GaConfig(population=12, generations=8, root_seed=21)
    r1 = nsga2_optimize(tradeoff, Bounds(), cfg)
    r2 = nsga2_optimize(tradeoff, Bounds(), cfg)
    assert [(d, m, s) for d, m, s in r1.pareto] == \
           [(d, m, s) for d, m, s in r2.pareto]
    assert r1.history == r2.history
