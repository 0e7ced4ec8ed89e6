"""Forward simulation of a net-load realization under a solved policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import StorageParams, ValueTable, feasible_action_interval, step_state
from .errors import InputError
from .netload import ScenarioConfig
from .risk import controller_rule


@dataclass
class DispatchTrace:
    """Per-stage dispatch record, plus the battery-less baseline.

    `s` holds the start-of-stage states (length T); `final_state` closes the
    trajectory. `n_tilde` is the signed intervention (shedding positive,
    curtailment negative) and `n_tilde_baseline` the same with b forced to 0.
    """

    s: np.ndarray
    b: np.ndarray
    n: np.ndarray
    n_tilde: np.ndarray
    p: np.ndarray
    n_tilde_baseline: np.ndarray
    final_state: float


def rollout(table: ValueTable, realization, s_start: float,
            scenario: ScenarioConfig, params: StorageParams) -> DispatchTrace:
    """Apply the grid policy along one realization of the net load.

    The policy is linearly interpolated in the state of charge and clamped
    into the feasible action interval so the capacity bounds hold exactly.
    """
    realization = np.asarray(realization, dtype=float)
    T = scenario.horizon
    if len(realization) != T:
        raise InputError(
            f"realization has {len(realization)} entries, expected horizon {T}"
        )
    if table.horizon != T:
        raise InputError(
            f"value table covers {table.horizon} stages, expected horizon {T}"
        )
    if not params.s_min - 1e-12 <= s_start <= params.s_max + 1e-12:
        raise InputError(
            f"start state {s_start} outside [{params.s_min}, {params.s_max}]"
        )
    s = float(np.clip(s_start, params.s_min, params.s_max))
    s_rec = np.empty(T)
    b_rec = np.empty(T)
    nt_rec = np.empty(T)
    p_rec = np.empty(T)
    base_rec = np.empty(T)
    for t in range(T):
        if len(table.states) > 1:
            b_pol = float(np.interp(s, table.states, table.actions[t]))
        else:
            b_pol = float(table.actions[t][0])
        lo, hi = feasible_action_interval(s, params)
        b = min(max(b_pol, lo), hi)
        n = float(realization[t])
        nt = controller_rule(n, b, scenario.p_min, scenario.p_max)
        s_rec[t] = s
        b_rec[t] = b
        nt_rec[t] = nt
        p_rec[t] = n - nt + b
        base_rec[t] = controller_rule(n, 0.0, scenario.p_min, scenario.p_max)
        s = step_state(s, b, params)
    return DispatchTrace(s=s_rec, b=b_rec, n=realization.copy(), n_tilde=nt_rec,
                         p=p_rec, n_tilde_baseline=base_rec, final_state=s)


def shed_curtail_split(trace: DispatchTrace) -> tuple[np.ndarray, np.ndarray]:
    """Split the signed intervention into shedding and curtailment magnitudes."""
    shedding = np.maximum(trace.n_tilde, 0.0)
    curtailment = np.maximum(-trace.n_tilde, 0.0)
    return shedding, curtailment
