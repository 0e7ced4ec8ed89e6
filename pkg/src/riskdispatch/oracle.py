"""Independent verification engines: Monte-Carlo CVaR and exhaustive tiny DP.

Randomness uses numpy's default PCG64 bit generator seeded from
``OracleConfig.rng_seed``; per-batch sub-streams are spawned deterministically
with ``np.random.SeedSequence(rng_seed).spawn``, so estimates are
reproducible bit-for-bit regardless of how batches are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import risk
from .dp import (StorageParams, feasible_action_interval, global_action_grid,
                 state_grid, _eff)
from .errors import SizeError, ValidationError
from .netload import ScenarioConfig, StageDistribution
from .risk import RiskSpec, controller_rule

_MAX_STAGES = 4
_MAX_ACTIONS = 15
_MAX_STATES = 7


@dataclass(frozen=True)
class OracleConfig:
    sample_count: int = 1_000_000
    rng_seed: int = 0
    action_grid_points: int = 9

    def __post_init__(self):
        if self.sample_count < 10_000:
            raise ValidationError(f"sample_count must be >= 10^4, got {self.sample_count}")
        if self.action_grid_points < 3:
            raise ValidationError("action_grid_points must be >= 3")


@dataclass(frozen=True)
class McCvarResult:
    estimate: float
    std_error: float
    empty_tail: bool = False


def mc_cvar(dist_n: StageDistribution, b: float, limits: tuple[float, float],
            alpha: float, cfg: OracleConfig, batches: int = 8) -> McCvarResult:
    """Sampled CVaR of the intervention magnitude, with a tail standard error.

    Draws are generated in deterministic per-batch sub-streams and
    concatenated, so the estimate does not depend on batch scheduling.
    """
    p_min, p_max = limits
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(batches)
    per = [cfg.sample_count // batches] * batches
    per[-1] += cfg.sample_count - sum(per)
    draws = np.concatenate([
        dist_n.sample(np.random.default_rng(s), m) for s, m in zip(seeds, per)
    ])
    mag = np.abs(controller_rule(draws, b, p_min, p_max))
    n = len(mag)
    if alpha > 0.0:
        mag_sorted = np.sort(mag)
        v = float(mag_sorted[max(math.ceil(alpha * n) - 1, 0)])
    else:
        v = 0.0
    estimate = v + float(np.maximum(mag - v, 0.0).mean()) / (1.0 - alpha)
    tail = mag[mag > v]
    if len(tail) == 0:
        return McCvarResult(estimate=estimate, std_error=0.0, empty_tail=True)
    if len(tail) == 1:
        return McCvarResult(estimate=estimate, std_error=float(tail[0]))
    se = float(tail.std(ddof=1) / math.sqrt(len(tail)))
    return McCvarResult(estimate=estimate, std_error=se)


@dataclass
class ExhaustiveResult:
    states: np.ndarray
    values: list[np.ndarray]
    optimal_cost: float
    optimal_state: float


def exhaustive_dp(scenario: ScenarioConfig, params: StorageParams,
                  risk_spec: RiskSpec, action_grid_points: int,
                  state_points: int) -> ExhaustiveResult:
    """Enumerate every feasible grid-action choice at every grid node.

    The action grid is `global_action_grid(params, action_grid_points)`, the
    same grid a restricted solver run would use. Successor states off the
    grid are valued by the same piecewise-linear interpolation rule the
    production solver uses, with identical float expressions, so agreement
    with the grid-restricted solver is exact. Guarded to tiny instances;
    larger ones raise SizeError.
    """
    T = scenario.horizon
    action_grid = global_action_grid(params, action_grid_points)
    if T > _MAX_STAGES:
        raise SizeError(f"exhaustive oracle limited to {_MAX_STAGES} stages, got {T}")
    if len(action_grid) > _MAX_ACTIONS:
        raise SizeError(f"exhaustive oracle limited to {_MAX_ACTIONS} actions")
    if state_points > _MAX_STATES:
        raise SizeError(f"exhaustive oracle limited to {_MAX_STATES} state points")
    states = state_grid(params, state_points)
    limits = (scenario.p_min, scenario.p_max)
    values: list[np.ndarray] = [np.zeros(len(states)) for _ in range(T + 1)]
    for t in range(T - 1, -1, -1):
        dist = scenario.distributions[t]
        cost_of = {float(a): risk.stage_cost(dist, float(a), limits, risk_spec)
                   for a in action_grid}
        for i, s in enumerate(states):
            lo, hi = feasible_action_interval(float(s), params)
            best_v, best_a = np.inf, None
            for a in action_grid:
                a = float(a)
                if a < lo or a > hi:
                    continue
                nxt = params.leakage_a * s + float(_eff(a, params)) * params.delta_t
                nxt = np.clip(nxt, params.s_min, params.s_max)
                v = cost_of[a] + float(np.interp(nxt, states, values[t + 1]))
                if v < best_v or (v == best_v and abs(a) < abs(best_a)):
                    best_v, best_a = v, a
            if best_a is None:
                raise SizeError(f"no feasible grid action at state {s}")
            values[t][i] = best_v
    j1 = values[0]
    idx = len(j1) - 1 - int(np.argmin(j1[::-1]))
    return ExhaustiveResult(states=states, values=values,
                            optimal_cost=float(j1[idx]),
                            optimal_state=float(states[idx]))
