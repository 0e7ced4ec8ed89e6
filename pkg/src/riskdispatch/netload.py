"""Per-stage probability models of the net load (demand minus renewables).

Only the net load matters downstream: every stage cost is a functional of the
distribution of ``n = load - generation``. Two families ship: a Gaussian model
(strictly positive density everywhere, so band-convexity is strict) and an
empirical step-function model built from raw samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import erfc, ndtri

from .errors import InputError, ValidationError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def aggregate(loads: Sequence[float], generations: Sequence[float]) -> float:
    """Net load of a bus: total consumer load minus total renewable output."""
    if len(loads) != len(generations):
        raise InputError(
            f"loads and generations must have equal length, got "
            f"{len(loads)} and {len(generations)}"
        )
    return float(sum(loads) - sum(generations))


def _phi(z):
    return np.exp(-0.5 * np.asarray(z, dtype=float) ** 2) * _INV_SQRT_2PI


def _norm_cdf(z):
    # 0.5*erfc(-z/sqrt(2)) keeps full relative accuracy in the lower tail
    return 0.5 * erfc(-np.asarray(z, dtype=float) / _SQRT2)


def _norm_sf(z):
    return 0.5 * erfc(np.asarray(z, dtype=float) / _SQRT2)


def _scalar_or_array(x, like):
    if np.isscalar(like) or getattr(like, "ndim", 1) == 0:
        return float(x)
    return x


@dataclass(frozen=True)
class Gaussian:
    """Normal net-load model with strictly positive stddev."""

    mean: float
    stddev: float

    def __post_init__(self):
        if not self.stddev > 0.0:
            raise ValidationError(f"Gaussian stddev must be > 0, got {self.stddev}")

    def cdf(self, x):
        return _scalar_or_array(_norm_cdf((np.asarray(x, float) - self.mean) / self.stddev), x)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
            raise InputError(f"quantile probability must lie in (0, 1), got {p}")
        return _scalar_or_array(self.mean + self.stddev * ndtri(p_arr), p)

    def upper_partial_expectation(self, k):
        """E[(n - k)^+], exact in closed form."""
        z = (np.asarray(k, float) - self.mean) / self.stddev
        val = self.stddev * _phi(z) + (self.mean - np.asarray(k, float)) * _norm_sf(z)
        return _scalar_or_array(np.maximum(val, 0.0), k)

    def lower_partial_expectation(self, k):
        """E[(k - n)^+], exact in closed form."""
        z = (np.asarray(k, float) - self.mean) / self.stddev
        val = self.stddev * _phi(z) + (np.asarray(k, float) - self.mean) * _norm_cdf(z)
        return _scalar_or_array(np.maximum(val, 0.0), k)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(self.mean, self.stddev, size)


@dataclass(frozen=True)
class Empirical:
    """Step-function model over a non-empty list of observed net loads.

    The CDF is the right-continuous empirical step function; no smoothing is
    applied, so Monte-Carlo checks against it are exact. Note this model has
    no density, so only non-strict convexity holds for costs built on it.
    """

    samples: tuple[float, ...]
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(self, samples: Sequence[float]):
        samples = tuple(float(s) for s in samples)
        if len(samples) == 0:
            raise ValidationError("Empirical distribution needs at least one sample")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_sorted", np.sort(np.asarray(samples, dtype=float)))

    @property
    def mean(self) -> float:
        return float(self._sorted.mean())

    def cdf(self, x):
        counts = np.searchsorted(self._sorted, np.asarray(x, float), side="right")
        return _scalar_or_array(counts / len(self._sorted), x)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        if np.any(p_arr <= 0.0) or np.any(p_arr >= 1.0):
            raise InputError(f"quantile probability must lie in (0, 1), got {p}")
        m = len(self._sorted)
        idx = np.maximum(np.ceil(p_arr * m).astype(int) - 1, 0)
        return _scalar_or_array(self._sorted[idx], p)

    def upper_partial_expectation(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        val = np.maximum(self._sorted[:, None] - k_arr[None, :], 0.0).mean(axis=0)
        return _scalar_or_array(val if np.ndim(k) else val[0], k)

    def lower_partial_expectation(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=float))
        val = np.maximum(k_arr[None, :] - self._sorted[:, None], 0.0).mean(axis=0)
        return _scalar_or_array(val if np.ndim(k) else val[0], k)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self._sorted, size=size, replace=True)


StageDistribution = Union[Gaussian, Empirical]


@dataclass(frozen=True)
class ScenarioConfig:
    """Horizon, per-stage net-load models, and the line-flow band."""

    horizon: int
    distributions: tuple[StageDistribution, ...]
    p_min: float
    p_max: float

    def __init__(self, horizon, distributions, p_min, p_max):
        distributions = tuple(distributions)
        if horizon < 0:
            raise ValidationError(f"horizon must be >= 0, got {horizon}")
        if len(distributions) != horizon:
            raise ValidationError(
                f"expected {horizon} stage distributions, got {len(distributions)}"
            )
        if not p_min < p_max:
            raise ValidationError(f"need p_min < p_max, got ({p_min}, {p_max})")
        object.__setattr__(self, "horizon", int(horizon))
        object.__setattr__(self, "distributions", distributions)
        object.__setattr__(self, "p_min", float(p_min))
        object.__setattr__(self, "p_max", float(p_max))

    def stage_means(self) -> np.ndarray:
        return np.array([d.mean for d in self.distributions], dtype=float)
