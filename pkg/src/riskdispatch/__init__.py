"""Risk-optimal battery dispatch for a transmission-limited microgrid.

Backward dynamic programming over the battery state of charge with CVaR
stage costs for load shedding and renewable curtailment, plus forward
simulation, Monte-Carlo/exhaustive verification oracles, and a CLI.
"""

from .dp import (SolverGrid, StorageParams, ValueTable, bellman_value,
                 feasible_action_interval, global_action_grid,
                 optimal_initial_state, solve, state_grid, step_state)
from .netload import Empirical, Gaussian, ScenarioConfig, StageDistribution, aggregate
from .oracle import McCvarResult, OracleConfig, exhaustive_dp, mc_cvar
from .risk import (CurtailmentMagnitudeDistribution, RiskSpec, controller_rule,
                   cvar_alpha, stage_cost, stage_cost_closed_form_alpha0,
                   stage_cost_vector, var_alpha)
from .sim import DispatchTrace, rollout, shed_curtail_split

__all__ = [
    "aggregate", "Gaussian", "Empirical", "StageDistribution", "ScenarioConfig",
    "RiskSpec", "CurtailmentMagnitudeDistribution", "controller_rule",
    "var_alpha", "cvar_alpha", "stage_cost", "stage_cost_vector",
    "stage_cost_closed_form_alpha0",
    "StorageParams", "SolverGrid", "ValueTable", "step_state",
    "feasible_action_interval", "bellman_value", "solve",
    "optimal_initial_state", "state_grid", "global_action_grid",
    "DispatchTrace", "rollout", "shed_curtail_split",
    "OracleConfig", "McCvarResult", "mc_cvar", "exhaustive_dp",
]

__version__ = "0.1.0"
