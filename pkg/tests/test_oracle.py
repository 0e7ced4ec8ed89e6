import numpy as np
import pytest

import riskdispatch as rd
from riskdispatch.errors import SizeError, ValidationError

BAND = (0.0, 0.6)
CVAR0_EXAMPLE = 0.1004156811193112


def test_oracle_config_invariants():
    with pytest.raises(ValidationError):
        rd.OracleConfig(sample_count=100)


def test_mc_cvar_all_mass_in_band():
    e = rd.Empirical([0.1, 0.3, 0.5])
    res = rd.mc_cvar(e, 0.0, BAND, 0.0, rd.OracleConfig(sample_count=10_000, rng_seed=1))
    assert res.estimate == 0.0
    assert res.std_error == 0.0
    assert res.empty_tail


def test_mc_cvar_gaussian_example():
    g = rd.Gaussian(0.0, 0.25)
    cfg = rd.OracleConfig(sample_count=10_000_000, rng_seed=42)
    res = rd.mc_cvar(g, 0.0, BAND, 0.0, cfg)
    assert abs(res.estimate - CVAR0_EXAMPLE) <= 4 * res.std_error
    # bitwise reproducibility for a fixed seed
    res2 = rd.mc_cvar(g, 0.0, BAND, 0.0, cfg)
    assert res.estimate == res2.estimate
    assert res.std_error == res2.std_error


def test_mc_cvar_batching_invariant():
    g = rd.Gaussian(0.1, 0.3)
    cfg = rd.OracleConfig(sample_count=100_000, rng_seed=7)
    a = rd.mc_cvar(g, 0.2, BAND, 0.05, cfg, batches=8)
    b = rd.mc_cvar(g, 0.2, BAND, 0.05, cfg, batches=8)
    assert a.estimate == b.estimate


def test_mc_cvar_convergence_rate():
    g = rd.Gaussian(0.3, 0.3)
    se_small = rd.mc_cvar(g, 0.0, BAND, 0.0,
                          rd.OracleConfig(sample_count=100_000, rng_seed=3)).std_error
    se_big = rd.mc_cvar(g, 0.0, BAND, 0.0,
                        rd.OracleConfig(sample_count=400_000, rng_seed=3)).std_error
    ratio = se_small / se_big
    assert 2.0 / 1.5 <= ratio <= 2.0 * 1.5


def test_exhaustive_dp_trivial_cases():
    params = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    spec = rd.RiskSpec(alpha=0.0)
    empty = rd.ScenarioConfig(0, (), *BAND)
    res = rd.exhaustive_dp(empty, params, spec, action_grid_points=5, state_points=3)
    assert res.optimal_cost == 0.0

    g = rd.Gaussian(0.8, 0.25)
    one = rd.ScenarioConfig(1, (g,), *BAND)
    res = rd.exhaustive_dp(one, params, spec, action_grid_points=9, state_points=3)
    # single stage: value at the full state is the g-minimum over feasible grid actions
    grid = rd.global_action_grid(params, 9)
    feas = grid[(grid >= -1.0) & (grid <= 0.0)]
    expected = min(rd.stage_cost(g, float(a), BAND, spec) for a in feas)
    assert res.values[0][-1] == expected


def test_exhaustive_dp_size_guard():
    params = rd.StorageParams(0.0, 1.0)
    spec = rd.RiskSpec()
    big = rd.ScenarioConfig(5, (rd.Gaussian(0.3, 0.25),) * 5, *BAND)
    with pytest.raises(SizeError):
        rd.exhaustive_dp(big, params, spec, action_grid_points=5, state_points=3)
    small = rd.ScenarioConfig(1, (rd.Gaussian(0.3, 0.25),), *BAND)
    with pytest.raises(SizeError):
        rd.exhaustive_dp(small, params, spec, action_grid_points=16, state_points=3)
    with pytest.raises(SizeError):
        rd.exhaustive_dp(small, params, spec, action_grid_points=5, state_points=8)


def test_exhaustive_bounds_continuous_dp():
    # the grid-restricted oracle can never beat the continuous search
    scen = rd.ScenarioConfig(
        2, (rd.Gaussian(0.5, 0.2), rd.Gaussian(-0.1, 0.3)), *BAND)
    params = rd.StorageParams(0.0, 1.0, leakage_a=0.98)
    spec = rd.RiskSpec(alpha=0.05)
    ex = rd.exhaustive_dp(scen, params, spec, action_grid_points=7, state_points=5)
    cont = rd.solve(scen, params, rd.SolverGrid(state_points=5), spec)
    assert np.all(ex.values[0] >= cont.values[0] - 1e-9)


def test_exhaustive_equals_restricted_solve_randomized():
    rng = np.random.default_rng(7)
    for _ in range(10):
        T = int(rng.integers(1, 4))
        dists = []
        for _ in range(T):
            if rng.random() < 0.5:
                dists.append(rd.Gaussian(float(rng.normal(0.3, 0.4)),
                                         float(rng.uniform(0.1, 0.4))))
            else:
                dists.append(rd.Empirical(list(rng.normal(0.3, 0.5,
                                                          int(rng.integers(1, 6))))))
        p_min = float(rng.uniform(-0.3, 0.1))
        scen = rd.ScenarioConfig(T, dists, p_min, p_min + float(rng.uniform(0.3, 0.8)))
        params = rd.StorageParams(0.0, float(rng.uniform(0.5, 1.5)),
                                  leakage_a=float(rng.uniform(0.9, 1.0)))
        spec = rd.RiskSpec(alpha=float(rng.uniform(0.0, 0.2)))
        sp = int(rng.integers(2, 6))
        ap = int(rng.integers(3, 10))
        ex = rd.exhaustive_dp(scen, params, spec, action_grid_points=ap,
                              state_points=sp)
        restricted = rd.solve(scen, params, rd.SolverGrid(state_points=sp), spec,
                              action_grid=rd.global_action_grid(params, ap))
        for a, b in zip(ex.values, restricted.values):
            assert np.array_equal(a, b)
