"""Shipped representative daily net-load profile.

A 24-hour mean profile with overnight and morning demand above the line
limit, a negative midday block (solar surplus), and an evening peak. It is
shape-matched to typical residential-plus-PV days, not digitized from any
measured dataset; numeric conclusions drawn from it are conditional on this
shape.
"""

from __future__ import annotations

from .netload import Gaussian, ScenarioConfig

# hours 0..23, normalized power units
DAILY_MEAN_PROFILE: tuple[float, ...] = (
    0.70, 0.65, 0.60, 0.55, 0.55, 0.60, 0.70, 0.80,
    0.85, 0.60, 0.20, -0.20, -0.40, -0.50, -0.45, -0.30,
    0.00, 0.40, 0.70, 0.85, 0.90, 0.85, 0.80, 0.75,
)

DAILY_STDDEV = 0.25
DAILY_P_MIN = 0.0
DAILY_P_MAX = 0.6


def daily_scenario(stddev: float = DAILY_STDDEV,
                   p_min: float = DAILY_P_MIN,
                   p_max: float = DAILY_P_MAX) -> ScenarioConfig:
    """24-stage Gaussian scenario over the shipped daily mean profile."""
    dists = tuple(Gaussian(mean=m, stddev=stddev) for m in DAILY_MEAN_PROFILE)
    return ScenarioConfig(horizon=24, distributions=dists, p_min=p_min, p_max=p_max)
