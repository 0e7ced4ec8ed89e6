"""Backward dynamic programming over a discretized state-of-charge grid.

Each stage minimizes G_t(b|s) = g_t(b) + J_{t+1}(next state) over the
feasible charge/discharge interval at s. The continuation is evaluated by
piecewise-linear interpolation of the next stage's sampled values; linear
interpolation of convex samples stays convex, so G_t remains strictly convex
in b and golden-section search is valid. The sweep fills per-stage value rows
and the optimal action at every grid node.

The stage cost depends on the action only, never on the state, so within one
stage the per-node searches differ only in their feasible brackets; they are
run in lockstep as one vectorized golden-section search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import risk
from .errors import FeasibilityError, InputError, ValidationError
from .netload import ScenarioConfig
from .risk import RiskSpec
from .search import golden_section_min, golden_section_min_vec

_CLAMP_RESIDUE = 1e-12
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class StorageParams:
    """Battery capacity bounds, hourly leakage, timestep, efficiencies."""

    s_min: float
    s_max: float
    leakage_a: float = 0.99
    delta_t: float = 1.0
    eta_in: float = 1.0
    eta_out: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.s_min <= self.s_max:
            raise ValidationError(
                f"need 0 <= s_min <= s_max, got ({self.s_min}, {self.s_max})"
            )
        if not 0.0 < self.leakage_a <= 1.0:
            raise ValidationError(f"leakage_a must lie in (0, 1], got {self.leakage_a}")
        if not self.delta_t > 0.0:
            raise ValidationError(f"delta_t must be > 0, got {self.delta_t}")
        if not (0.0 < self.eta_in <= 1.0 and 0.0 < self.eta_out <= 1.0):
            raise ValidationError(
                f"efficiencies must lie in (0, 1], got ({self.eta_in}, {self.eta_out})"
            )


@dataclass(frozen=True)
class SolverGrid:
    """Discretization settings for the backward sweep."""

    state_points: int = 201
    action_tolerance: float = 1e-6
    action_bracket_points: int = 33

    def __post_init__(self):
        if self.state_points < 2:
            raise ValidationError(f"state_points must be >= 2, got {self.state_points}")
        if not self.action_tolerance > 0.0:
            raise ValidationError("action_tolerance must be > 0")
        if self.action_bracket_points < 3:
            raise ValidationError("action_bracket_points must be >= 3")


@dataclass
class ValueTable:
    """Sampled cost-to-go rows J_1..J_{T+1} and the grid policy b*_1..b*_T."""

    states: np.ndarray
    values: list[np.ndarray] = field(default_factory=list)
    actions: list[np.ndarray] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.actions)


def state_grid(params: StorageParams, state_points: int) -> np.ndarray:
    if params.s_min == params.s_max:
        # zero-capacity battery: a single state, the only feasible grid
        return np.asarray([params.s_min], dtype=float)
    return np.linspace(params.s_min, params.s_max, state_points)


def _eff(b, params: StorageParams):
    b = np.asarray(b, dtype=float)
    return np.where(b > 0.0, params.eta_in * b, b / params.eta_out)


def step_state(s, b, params: StorageParams):
    """Next state of charge a*s + eff(b)*dt, clamped only for float residue."""
    s_arr = np.asarray(s, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    nxt = params.leakage_a * s_arr + _eff(b_arr, params) * params.delta_t
    if np.any(nxt < params.s_min - _CLAMP_RESIDUE) or np.any(nxt > params.s_max + _CLAMP_RESIDUE):
        raise FeasibilityError(
            f"action {b} drives the state of charge outside "
            f"[{params.s_min}, {params.s_max}]"
        )
    nxt = np.clip(nxt, params.s_min, params.s_max)
    if np.isscalar(s) and np.isscalar(b):
        return float(nxt)
    return nxt


def feasible_action_interval(s, params: StorageParams):
    """Charge/discharge rates keeping the next state inside the capacity bounds."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < params.s_min - _CLAMP_RESIDUE) or np.any(s_arr > params.s_max + _CLAMP_RESIDUE):
        raise InputError(
            f"state {s} outside capacity bounds [{params.s_min}, {params.s_max}]"
        )
    room_hi = params.s_max - params.leakage_a * s_arr
    room_lo = params.s_min - params.leakage_a * s_arr
    b_high = np.where(room_hi >= 0.0,
                      room_hi / (params.eta_in * params.delta_t),
                      room_hi * params.eta_out / params.delta_t)
    b_low = np.where(room_lo <= 0.0,
                     room_lo * params.eta_out / params.delta_t,
                     room_lo / (params.eta_in * params.delta_t))
    if np.isscalar(s):
        return float(b_low), float(b_high)
    return b_low, b_high


def global_action_grid(params: StorageParams, points: int) -> np.ndarray:
    """Uniform action grid spanning every state's feasible interval."""
    lo_at_full, _ = feasible_action_interval(params.s_max, params)
    _, hi_at_empty = feasible_action_interval(params.s_min, params)
    return np.linspace(lo_at_full, hi_at_empty, points)


def _stage_objective(dist, limits, spec, states, next_row, params):
    def G(b_vec):
        g = risk.stage_cost_vector(dist, b_vec, limits, spec)
        nxt = step_state(states, b_vec, params)
        return g + np.interp(nxt, states, next_row)
    return G


def _minimize_row_continuous(G, b_low, b_high, tol):
    """Golden-section per node, then tie-break toward the smaller |b|."""
    b_mid = golden_section_min_vec(G, b_low, b_high, tol)
    zero = np.clip(np.zeros_like(b_low), b_low, b_high)
    cand_b = np.stack([b_mid, zero, b_low, b_high])
    cand_v = np.stack([G(c) for c in cand_b])
    best = cand_v.min(axis=0)
    eligible = cand_v <= best + _TIE_TOL * np.maximum(1.0, np.abs(best))
    keyed = np.where(eligible, np.abs(cand_b), np.inf)
    pick = keyed.argmin(axis=0)
    cols = np.arange(cand_b.shape[1])
    return cand_v[pick, cols], cand_b[pick, cols]


def _minimize_row_on_grid(dist, limits, spec, states, next_row, params,
                          b_low, b_high, action_grid):
    """Exhaustive minimization over a fixed action grid (oracle-comparable).

    Uses exact float comparisons and first-occurrence tie-breaking on |b| so
    the result is bitwise-reproducible against an independent enumeration.
    """
    n = len(states)
    vals = np.full((len(action_grid), n), np.inf)
    for i, a in enumerate(action_grid):
        feas = (a >= b_low) & (a <= b_high)
        if not np.any(feas):
            continue
        g = risk.stage_cost(dist, float(a), limits, spec)
        nxt = params.leakage_a * states[feas] + float(_eff(a, params)) * params.delta_t
        nxt = np.clip(nxt, params.s_min, params.s_max)
        vals[i, feas] = g + np.interp(nxt, states, next_row)
    if np.any(np.all(np.isinf(vals), axis=0)):
        raise FeasibilityError("a grid state has no feasible action on the action grid")
    best = vals.min(axis=0)
    keyed = np.where(vals == best, np.abs(action_grid)[:, None], np.inf)
    pick = keyed.argmin(axis=0)
    cols = np.arange(n)
    return vals[pick, cols], action_grid[pick]


def bellman_value(s: float, t: int, next_values: np.ndarray,
                  scenario: ScenarioConfig, params: StorageParams,
                  grid: SolverGrid, risk_spec: RiskSpec,
                  states: np.ndarray | None = None) -> tuple[float, float]:
    """Optimal (cost-to-go, action) at state s for stage t (0-based)."""
    if states is None:
        states = state_grid(params, grid.state_points)
    dist = scenario.distributions[t]
    limits = (scenario.p_min, scenario.p_max)
    s = float(s)

    def G(b_vec):
        g = risk.stage_cost_vector(dist, b_vec, limits, risk_spec)
        nxt = step_state(np.full_like(np.asarray(b_vec, float), s), b_vec, params)
        return g + np.interp(nxt, states, next_values)

    b_low, b_high = feasible_action_interval(np.asarray([s]), params)
    if b_low[0] == b_high[0]:
        return float(G(b_low)[0]), float(b_low[0])
    val, act = _minimize_row_continuous(G, b_low, b_high, grid.action_tolerance)
    return float(val[0]), float(act[0])


def solve(scenario: ScenarioConfig, params: StorageParams, grid: SolverGrid,
          risk_spec: RiskSpec, action_grid: np.ndarray | None = None) -> ValueTable:
    """Backward sweep t = T..1; J_{T+1} is identically zero.

    When `action_grid` is given, the inner minimization is restricted to that
    fixed grid (used for oracle cross-checks) instead of continuous search.
    """
    states = state_grid(params, grid.state_points)
    T = scenario.horizon
    values: list[np.ndarray] = [np.zeros(0)] * (T + 1)
    actions: list[np.ndarray] = [np.zeros(0)] * T
    values[T] = np.zeros(len(states))
    limits = (scenario.p_min, scenario.p_max)
    b_low, b_high = feasible_action_interval(states, params)
    b_low = np.atleast_1d(b_low)
    b_high = np.atleast_1d(b_high)
    for t in range(T - 1, -1, -1):
        dist = scenario.distributions[t]
        if action_grid is not None:
            row_v, row_b = _minimize_row_on_grid(
                dist, limits, risk_spec, states, values[t + 1], params,
                b_low, b_high, np.asarray(action_grid, dtype=float))
        else:
            G = _stage_objective(dist, limits, risk_spec, states, values[t + 1], params)
            row_v, row_b = _minimize_row_continuous(G, b_low, b_high,
                                                    grid.action_tolerance)
        values[t] = row_v
        actions[t] = row_b
    return ValueTable(states=states, values=values, actions=actions)


def optimal_initial_state(table: ValueTable) -> tuple[float, float]:
    """Grid minimizer of J_1, ties resolved toward the fuller battery.

    One golden-section refinement pass runs on the piecewise-linear
    interpolant between the minimizer's neighbors; it is kept only if it
    strictly improves on the grid value.
    """
    j1 = table.values[0]
    states = table.states
    rev_idx = len(j1) - 1 - int(np.argmin(j1[::-1]))  # ties -> largest s
    s_best, v_best = float(states[rev_idx]), float(j1[rev_idx])
    if len(states) > 1:
        lo = float(states[max(rev_idx - 1, 0)])
        hi = float(states[min(rev_idx + 1, len(states) - 1)])
        s_ref = golden_section_min(lambda s: float(np.interp(s, states, j1)),
                                   lo, hi, 1e-10)
        v_ref = float(np.interp(s_ref, states, j1))
        if v_ref < v_best - _TIE_TOL * max(1.0, abs(v_best)):
            return s_ref, v_ref
    return s_best, v_best
