import numpy as np
import pytest

import riskdispatch as rd
from riskdispatch import dp
from riskdispatch.errors import FeasibilityError, InputError, ValidationError

SPEC0 = rd.RiskSpec(alpha=0.0)


def test_storage_params_invariants():
    with pytest.raises(ValidationError):
        rd.StorageParams(s_min=1.0, s_max=0.5)
    with pytest.raises(ValidationError):
        rd.StorageParams(s_min=0.0, s_max=1.0, leakage_a=0.0)
    with pytest.raises(ValidationError):
        rd.StorageParams(s_min=0.0, s_max=1.0, eta_in=1.5)
    with pytest.raises(ValidationError):
        rd.StorageParams(s_min=0.0, s_max=1.0, delta_t=0.0)


def test_step_state_examples():
    p = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    assert rd.step_state(0.5, 0.2, p) == pytest.approx(0.7)
    p99 = rd.StorageParams(0.0, 1.0, leakage_a=0.99)
    assert rd.step_state(0.5, 0.0, p99) == pytest.approx(0.495)
    p_eta = rd.StorageParams(0.0, 1.0, leakage_a=1.0, eta_out=0.8)
    assert rd.step_state(0.5, -0.2, p_eta) == pytest.approx(0.25)


def test_step_state_rejects_infeasible():
    p = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    with pytest.raises(FeasibilityError):
        rd.step_state(0.9, 0.5, p)


def test_feasible_action_interval_examples():
    p99 = rd.StorageParams(0.0, 1.0, leakage_a=0.99)
    lo, hi = rd.feasible_action_interval(0.5, p99)
    assert (lo, hi) == pytest.approx((-0.495, 0.505))
    p = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    assert rd.feasible_action_interval(1.0, p) == pytest.approx((-1.0, 0.0))
    assert rd.feasible_action_interval(0.0, p) == pytest.approx((0.0, 1.0))
    with pytest.raises(InputError):
        rd.feasible_action_interval(1.5, p)


def test_feasible_interval_with_efficiencies_round_trips():
    p = rd.StorageParams(0.1, 0.9, leakage_a=0.97, eta_in=0.9, eta_out=0.85)
    for s in np.linspace(0.1, 0.9, 7):
        lo, hi = rd.feasible_action_interval(float(s), p)
        assert lo <= hi
        assert rd.step_state(float(s), lo, p) == pytest.approx(p.s_min, abs=1e-12)
        assert rd.step_state(float(s), hi, p) == pytest.approx(p.s_max, abs=1e-12)


def test_bellman_zero_cost_tie_breaks_to_zero_action():
    scen = rd.ScenarioConfig(1, (rd.Empirical([0.1, 0.5]),), 0.0, 0.6)
    params = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    grid = rd.SolverGrid(state_points=11)
    j, b = rd.bellman_value(0.5, 0, np.zeros(11), scen, params, grid, SPEC0)
    assert j == pytest.approx(0.0, abs=1e-12)
    assert b == 0.0


def test_bellman_terminal_stage_reduces_to_stage_cost_min():
    g = rd.Gaussian(0.8, 0.25)
    scen = rd.ScenarioConfig(1, (g,), 0.0, 0.6)
    params = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    grid = rd.SolverGrid(state_points=21)
    j, b = rd.bellman_value(1.0, 0, np.zeros(21), scen, params, grid, SPEC0)
    # dense-scan oracle over the feasible interval [-1, 0]
    bs = np.linspace(-1.0, 0.0, 4001)
    gs = rd.stage_cost_vector(g, bs, (0.0, 0.6), SPEC0)
    assert j == pytest.approx(gs.min(), abs=1e-9)
    assert b == pytest.approx(bs[gs.argmin()], abs=1e-3)
    # symmetry of the Gaussian about the band center puts the minimizer at -0.5
    assert b == pytest.approx(-0.5, abs=1e-4)


def test_solve_empty_horizon():
    scen = rd.ScenarioConfig(0, (), 0.0, 0.6)
    params = rd.StorageParams(0.0, 1.0)
    table = rd.solve(scen, params, rd.SolverGrid(state_points=5), rd.RiskSpec())
    assert table.horizon == 0
    assert len(table.values) == 1
    assert np.array_equal(table.values[0], np.zeros(5))


def test_solve_terminal_row_is_zero(daily_table):
    assert np.array_equal(daily_table.values[-1], np.zeros(len(daily_table.states)))


def test_value_rows_convex(daily_table):
    for row in daily_table.values:
        if len(row) >= 3:
            tol = 1e-7 * max(np.abs(row).max(), 1e-12)
            assert np.diff(row, 2).min() >= -tol


def test_policy_feasible(daily_table):
    params = rd.StorageParams(0.0, 1.0, leakage_a=0.99, delta_t=1.0)
    lo, hi = rd.feasible_action_interval(daily_table.states, params)
    for row_b in daily_table.actions:
        assert np.all(row_b >= lo - 1e-12)
        assert np.all(row_b <= hi + 1e-12)
        nxt = rd.step_state(daily_table.states, np.clip(row_b, lo, hi), params)
        assert np.all(nxt >= params.s_min - 1e-12)
        assert np.all(nxt <= params.s_max + 1e-12)


def test_stage_objective_unimodal(daily, daily_table):
    """Dense b-scan of G_t at random (t, s) has a single local minimum."""
    params = rd.StorageParams(0.0, 1.0, leakage_a=0.99, delta_t=1.0)
    spec = rd.RiskSpec(alpha=0.01)
    states = daily_table.states
    rng = np.random.default_rng(17)
    for _ in range(15):
        t = int(rng.integers(0, daily.horizon))
        s = float(rng.uniform(0.0, 1.0))
        lo, hi = rd.feasible_action_interval(s, params)
        bs = np.linspace(lo, hi, 201)
        g = rd.stage_cost_vector(daily.distributions[t], bs, (0.0, 0.6), spec)
        cont = np.interp(rd.step_state(np.full_like(bs, s), bs, params),
                         states, daily_table.values[t + 1])
        vals = g + cont
        i = int(vals.argmin())
        assert np.all(np.diff(vals[:i + 1]) <= 1e-9)
        assert np.all(np.diff(vals[i:]) >= -1e-9)


def test_battery_never_hurts(daily, daily_table):
    spec = rd.RiskSpec(alpha=0.01)
    no_battery = sum(rd.stage_cost(d, 0.0, (0.0, 0.6), spec)
                     for d in daily.distributions)
    assert np.all(daily_table.values[0] <= no_battery + 1e-9)


def test_optimal_initial_state_tie_breaks():
    states = np.linspace(0.0, 1.0, 5)
    decreasing = rd.ValueTable(states=states,
                               values=[np.array([4.0, 3.0, 2.0, 1.0, 0.5])],
                               actions=[])
    s, j = rd.optimal_initial_state(decreasing)
    assert s == 1.0 and j == 0.5
    constant = rd.ValueTable(states=states, values=[np.ones(5)], actions=[])
    s, j = rd.optimal_initial_state(constant)
    assert s == 1.0 and j == 1.0


def test_solve_matches_exhaustive_on_tiny_instance():
    scen = rd.ScenarioConfig(
        2, (rd.Empirical([0.1, 0.5]), rd.Empirical([-0.2, 0.7])), 0.0, 0.6)
    params = rd.StorageParams(0.0, 1.0, leakage_a=1.0)
    spec = rd.RiskSpec(alpha=0.0)
    ex = rd.exhaustive_dp(scen, params, spec, action_grid_points=9, state_points=5)
    restricted = rd.solve(scen, params, rd.SolverGrid(state_points=5), spec,
                          action_grid=rd.global_action_grid(params, 9))
    for a, b in zip(ex.values, restricted.values):
        assert np.array_equal(a, b)


def test_solve_deterministic(daily):
    params = rd.StorageParams(0.0, 1.0, leakage_a=0.99)
    spec = rd.RiskSpec(alpha=0.01)
    grid = rd.SolverGrid(state_points=21)
    t1 = rd.solve(daily, params, grid, spec)
    t2 = rd.solve(daily, params, grid, spec)
    for a, b in zip(t1.values, t2.values):
        assert np.array_equal(a, b)
    for a, b in zip(t1.actions, t2.actions):
        assert np.array_equal(a, b)


def test_degenerate_single_action_state():
    params = rd.StorageParams(0.5, 0.5, leakage_a=1.0)
    scen = rd.ScenarioConfig(1, (rd.Gaussian(0.3, 0.25),), 0.0, 0.6)
    table = rd.solve(scen, params, rd.SolverGrid(state_points=2), rd.RiskSpec(alpha=0.0))
    assert len(table.states) == 1
    assert table.actions[0][0] == 0.0
