import numpy as np
import pytest

import riskdispatch as rd
from riskdispatch.profiles import daily_scenario

DAILY_PARAMS = rd.StorageParams(s_min=0.0, s_max=1.0, leakage_a=0.99, delta_t=1.0)
DAILY_RISK = rd.RiskSpec(alpha=0.01)


@pytest.fixture(scope="session")
def daily():
    return daily_scenario()


@pytest.fixture(scope="session")
def daily_table(daily):
    """One shared 201-point solve of the showcase day."""
    return rd.solve(daily, DAILY_PARAMS, rd.SolverGrid(state_points=201), DAILY_RISK)


def convexity_violation(row: np.ndarray) -> float:
    """Most negative second difference, normalized for the row's scale."""
    if len(row) < 3:
        return 0.0
    d2 = np.diff(row, 2)
    return float(d2.min())
