"""Monte Carlo sampling: substreams, CRN, estimates, failure policy."""

import numpy as np
import pytest

from vines import (DesignPoint, DomainError, SimulationError,
                   UncertaintyModel, aleatory_draws, base_draws,
                   ci95_interval, compare_designs, mc_estimate,
                   sample_inputs)
from vines.stochastic import estimate_from_values, sample_design_arrays


def constant_50(kappa, lc, ce, v10, u, horizon):
    return np.full(len(v10), 50.0)


def linear_in_speed(kappa, lc, ce, v10, u, horizon):
    return 100.0 * v10


def test_design_point_validation():
    DesignPoint(0.5, 0.5, 0.05)
    with pytest.raises(DomainError):
        DesignPoint(0.0, 0.5, 0.05)
    with pytest.raises(DomainError):
        DesignPoint(0.5, 1.2, 0.05)
    with pytest.raises(DomainError):
        DesignPoint(0.5, 0.5, -0.01)


def test_uncertainty_model_validation():
    UncertaintyModel()
    UncertaintyModel(aleatory=(0.55, 0.55))  # point mass allowed
    with pytest.raises(DomainError):
        UncertaintyModel(design_sd=-1e-9)
    with pytest.raises(DomainError):
        UncertaintyModel(aleatory=(1.0, 0.1))
    with pytest.raises(DomainError):
        UncertaintyModel(fixed=(0.0, 0.2))


def test_base_draws_rows_do_not_depend_on_batch_size():
    z_small, u_small = base_draws(50, 1234)
    z_big, u_big = base_draws(400, 1234)
    assert np.array_equal(z_big[:50], z_small)
    assert np.array_equal(u_big[:50], u_small)


def test_base_draws_are_frozen_and_cached():
    z1, u1 = base_draws(32, 7)
    z2, u2 = base_draws(32, 7)
    assert z1 is z2 and u1 is u2
    with pytest.raises(ValueError):
        z1[0, 0] = 99.0


def test_common_random_numbers_across_designs():
    u = UncertaintyModel()
    d_a = DesignPoint(0.2, 0.9, 0.01)
    d_b = DesignPoint(0.8, 0.3, 0.08)
    ka, la, ca, va = sample_design_arrays(d_a, u, 200, 99)
    kb, lb, cb, vb = sample_design_arrays(d_b, u, 200, 99)
    assert np.array_equal(va, vb)  # aleatory input identical
    # same standard normals under both means:
    assert np.allclose(ka - d_a.mu_kappa, kb - d_b.mu_kappa, atol=1e-12)


def test_zero_design_sd_gives_exact_means():
    u = UncertaintyModel(design_sd=0.0)
    d = DesignPoint(0.39, 0.68, 0.013)
    kappa, lc, ce, _ = sample_design_arrays(d, u, 100, 5)
    assert np.all(kappa == d.mu_kappa)
    assert np.all(lc == d.mu_Lc)
    assert np.all(ce == d.mu_ce)


def test_perturbations_are_clamped():
    u = UncertaintyModel(design_sd=0.5)
    d = DesignPoint(0.01, 0.99, 0.5)
    kappa, lc, ce, _ = sample_design_arrays(d, u, 2000, 11)
    for arr in (kappa, lc, ce):
        assert np.min(arr) >= 0.001
        assert np.max(arr) <= 1.0
    assert np.any(kappa == 0.001)  # low mean + fat noise must clip
    assert np.any(lc == 1.0)


def test_sample_inputs_is_pure_and_matches_batch_row():
    u = UncertaintyModel()
    d = DesignPoint(0.54, 0.99, 0.05)
    p1, s1 = sample_inputs(d, u, 17, 321)
    p2, s2 = sample_inputs(d, u, 17, 321)
    assert p1 == p2 and s1 == s2
    kappa, lc, ce, v10 = sample_design_arrays(d, u, 64, 321)
    assert p1.kappa == kappa[17]
    assert p1.L_c == lc[17]
    assert p1.c_e == ce[17]
    assert s1.v1 == v10[17]
    assert (s1.x1, s1.x2, s1.v2) == (u.x1_0, u.x2_0, 0.0)


def test_mc_estimate_constant_objective():
    est = mc_estimate(DesignPoint(0.5, 0.5, 0.05), UncertaintyModel(),
                      50, 1, evaluator=constant_50)
    assert est.mean == 50.0
    assert est.sigma == 0.0
    assert est.ci95 == (50.0, 50.0)
    assert est.n == 50 and est.n_failed == 0


def test_estimate_from_known_values():
    est = estimate_from_values(np.array([0.2, 0.4, 0.6, 0.8]), seed=3)
    assert est.mean == pytest.approx(0.5, abs=1e-12)
    assert est.sigma == pytest.approx(0.2581989, abs=1e-7)
    lo, hi = est.ci95
    assert lo == pytest.approx(0.5 - 1.96 * est.sigma / 2.0, abs=1e-12)
    assert hi == pytest.approx(0.5 + 1.96 * est.sigma / 2.0, abs=1e-12)
    with pytest.raises(DomainError):
        estimate_from_values(np.array([1.0]), seed=3)


def test_ci95_interval_formula():
    lo, hi = ci95_interval(10.0, 2.0, 100)
    assert lo == pytest.approx(10.0 - 1.96 * 0.2)
    assert hi == pytest.approx(10.0 + 1.96 * 0.2)
    with pytest.raises(DomainError):
        ci95_interval(1.0, 1.0, 0)


def test_failure_policy_boundary():
    def failing(n_bad):
        def ev(kappa, lc, ce, v10, u, horizon):
            out = np.full(len(v10), 40.0)
            out[:n_bad] = np.nan
            return out
        return ev

    d, u = DesignPoint(0.5, 0.5, 0.05), UncertaintyModel()
    est = mc_estimate(d, u, 100, 2, evaluator=failing(5))  # 5% tolerated
    assert est.n_failed == 5 and est.n == 95
    with pytest.raises(SimulationError):
        mc_estimate(d, u, 100, 2, evaluator=failing(6))
    with pytest.raises(DomainError):
        mc_estimate(d, u, 1, 2, evaluator=failing(0))


def test_compare_designs_matches_single_estimates():
    u = UncertaintyModel()
    designs = [DesignPoint(0.39, 0.68, 0.013), DesignPoint(0.39, 0.68, 0.013),
               DesignPoint(0.54, 0.27, 0.06)]
    ests, matrix = compare_designs(designs, u, 60, 44,
                                   evaluator=linear_in_speed)
    assert matrix.shape == (3, 60)
    assert ests[0] == ests[1]  # duplicate designs, identical draws
    assert np.array_equal(matrix[0], matrix[1])
    solo = mc_estimate(designs[2], u, 60, 44, evaluator=linear_in_speed)
    assert ests[2] == solo
    with pytest.raises(DomainError):
        compare_designs([], u, 60, 44, evaluator=linear_in_speed)


def test_compare_designs_single_sample_degenerates():
    ests, matrix = compare_designs([DesignPoint(0.5, 0.5, 0.05)],
                                   UncertaintyModel(), 1, 9,
                                   evaluator=constant_50)
    assert matrix.shape == (1, 1)
    assert ests[0].mean == 50.0 and ests[0].n == 1
    assert np.isnan(ests[0].sigma)
    assert all(np.isnan(b) for b in ests[0].ci95)


def test_aleatory_draws_match_uniform_law():
    u = UncertaintyModel()
    v = aleatory_draws(u, 100_000, 12345)
    assert np.min(v) >= 0.1 and np.max(v) <= 1.0
    assert float(np.mean(v)) == pytest.approx(0.55, abs=0.01)


def test_standard_error_scales_with_sample_size():
    d, u = DesignPoint(0.5, 0.5, 0.05), UncertaintyModel()
    se = {}
    for n in (100, 400, 1600):
        est = mc_estimate(d, u, n, 2024, evaluator=linear_in_speed)
        se[n] = (est.ci95[1] - est.ci95[0]) / 2.0
    assert se[100] / se[400] == pytest.approx(2.0, rel=0.2)
    assert se[400] / se[1600] == pytest.approx(2.0, rel=0.2)
