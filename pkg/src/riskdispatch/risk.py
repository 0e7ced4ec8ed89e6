"""Shedding/curtailment risk: the controller rule, VaR, CVaR, and stage cost.

The controller intervenes minimally: whenever the would-be line flow n + b
leaves the band [P_min, P_max] it sheds load (positive intervention) or
curtails renewables (negative intervention) just enough to pin the flow to
the violated limit. The per-stage loss is the magnitude of that intervention,
and the stage cost is its CVaR at the configured confidence level.

CVaR is evaluated through the Rockafellar-Uryasev variational form

    CVaR_a(X) = min_v { v + E[(X - v)^+] / (1 - a) },

which handles the probability atom at zero loss cleanly. The tail expectation
splits into two partial expectations of the underlying net load, exact for
both shipped distribution families, so no quadrature is needed; the
``quadrature_points`` knob is reserved for future models without closed-form
partial moments.

Convention note: alpha is the probability that the loss does NOT exceed
VaR_alpha, so alpha = 0.01 means VaR is the 1%-quantile of the loss (usually
zero when most of the mass sits at zero intervention) and CVaR averages
essentially the whole loss, scaled by 1/(1-alpha). Users accustomed to
alpha = 0.95-style conventions should pass 1 - alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, UnsupportedModelError, ValidationError
from .netload import Gaussian, StageDistribution, _scalar_or_array
from .search import golden_section_min_vec

# the (1 - 1e-9) bracket ceiling for the variational search, expressed as a
# net-load tail probability split across both band violations
_BRACKET_TAIL = 5e-10


@dataclass(frozen=True)
class RiskSpec:
    """Confidence level and evaluation settings for CVaR."""

    alpha: float = 0.01
    ru_tolerance: float = 1e-10
    quadrature_points: int = 256

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValidationError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not self.ru_tolerance > 0.0:
            raise ValidationError("ru_tolerance must be > 0")
        if self.quadrature_points < 64:
            raise ValidationError("quadrature_points must be >= 64")


def controller_rule(n, b, p_min: float, p_max: float):
    """Minimal signed intervention pinning the flow n - out + b to the band.

    Positive output is load shedding, negative is renewable curtailment,
    zero means the flow already fits. Works elementwise on arrays.
    """
    if not p_min < p_max:
        raise InputError(f"need p_min < p_max, got ({p_min}, {p_max})")
    flow = np.asarray(n, dtype=float) + np.asarray(b, dtype=float)
    out = np.where(flow > p_max, flow - p_max,
                   np.where(flow < p_min, flow - p_min, 0.0))
    if np.isscalar(n) and np.isscalar(b):
        return float(out)
    return out


@dataclass(frozen=True)
class CurtailmentMagnitudeDistribution:
    """Distribution of the intervention magnitude |ñ(b)| for a fixed action.

    Derived view over the net-load model: the magnitude has an atom at zero
    (the in-band event) and, for z > 0,
    ``cdf_magnitude(z) = F_n(p_max - b + z) - F_n(p_min - b - z)``.
    """

    dist: StageDistribution
    p_min: float
    p_max: float
    b: float

    def __post_init__(self):
        if not self.p_min < self.p_max:
            raise ValidationError(f"need p_min < p_max, got ({self.p_min}, {self.p_max})")

    def atom_at_zero(self) -> float:
        return float(self.dist.cdf(self.p_max - self.b) - self.dist.cdf(self.p_min - self.b))

    def cdf_magnitude(self, z):
        z_arr = np.asarray(z, dtype=float)
        val = np.where(
            z_arr < 0.0,
            0.0,
            self.dist.cdf(self.p_max - self.b + z_arr)
            - self.dist.cdf(self.p_min - self.b - z_arr),
        )
        return _scalar_or_array(val, z)

    def tail_expectation(self, v):
        """E[(|ñ| - v)^+] for v >= 0, split into the two band-violation tails."""
        v_arr = np.asarray(v, dtype=float)
        val = (self.dist.upper_partial_expectation(self.p_max - self.b + v_arr)
               + self.dist.lower_partial_expectation(self.p_min - self.b - v_arr))
        return _scalar_or_array(val, v)

    def magnitude_bracket(self) -> float:
        """Upper bound on the (1 - 1e-9)-quantile of the magnitude."""
        n_hi = self.dist.quantile(1.0 - _BRACKET_TAIL)
        n_lo = self.dist.quantile(_BRACKET_TAIL)
        return max(n_hi + self.b - self.p_max, self.p_min - self.b - n_lo, 0.0)


def var_alpha(dist: CurtailmentMagnitudeDistribution, alpha: float) -> float:
    """Generalized inverse of the magnitude CDF at level alpha."""
    if not 0.0 <= alpha < 1.0:
        raise InputError(f"alpha must lie in [0, 1), got {alpha}")
    if alpha == 0.0 or dist.atom_at_zero() >= alpha:
        return 0.0
    lo, hi = 0.0, max(dist.magnitude_bracket(), 1.0)
    while dist.cdf_magnitude(hi) < alpha:
        hi *= 2.0
        if hi > 1e12:
            raise InputError("magnitude quantile bracket did not close")
    # bisect keeping cdf(hi) >= alpha > cdf(lo)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if dist.cdf_magnitude(mid) >= alpha:
            hi = mid
        else:
            lo = mid
    return hi


def _ru_cvar_vec(dist: StageDistribution, b: np.ndarray, p_min: float,
                 p_max: float, spec: RiskSpec) -> np.ndarray:
    """Rockafellar-Uryasev CVaR of the magnitude, vectorized over actions."""
    b = np.asarray(b, dtype=float)
    n_hi = dist.quantile(1.0 - _BRACKET_TAIL)
    n_lo = dist.quantile(_BRACKET_TAIL)
    hi = np.maximum(np.maximum(n_hi + b - p_max, p_min - b - n_lo), 0.0)
    lo = np.zeros_like(hi)
    scale = 1.0 / (1.0 - spec.alpha)

    def objective(v):
        tail = (dist.upper_partial_expectation(p_max - b + v)
                + dist.lower_partial_expectation(p_min - b - v))
        return v + scale * tail

    v_star = golden_section_min_vec(objective, lo, hi, spec.ru_tolerance)
    # the objective dominates CVaR everywhere; keep the best evaluated point,
    # including v = 0, which is exact whenever the zero atom covers alpha
    return np.minimum(objective(v_star), objective(lo))


def cvar_alpha(dist: CurtailmentMagnitudeDistribution, spec: RiskSpec) -> float:
    """CVaR of the intervention magnitude at the spec's confidence level."""
    return float(_ru_cvar_vec(dist.dist, np.asarray([dist.b]), dist.p_min,
                              dist.p_max, spec)[0])


def stage_cost(dist_n: StageDistribution, b: float, limits: tuple[float, float],
               spec: RiskSpec) -> float:
    """g(b): CVaR of the shedding/curtailment magnitude under action b."""
    p_min, p_max = limits
    if not p_min < p_max:
        raise InputError(f"need p_min < p_max, got {limits}")
    return float(_ru_cvar_vec(dist_n, np.asarray([float(b)]), p_min, p_max, spec)[0])


def stage_cost_vector(dist_n: StageDistribution, b: np.ndarray,
                      limits: tuple[float, float], spec: RiskSpec) -> np.ndarray:
    """Vectorized `stage_cost` over an array of actions (same code path)."""
    p_min, p_max = limits
    if not p_min < p_max:
        raise InputError(f"need p_min < p_max, got {limits}")
    return _ru_cvar_vec(dist_n, np.asarray(b, dtype=float), p_min, p_max, spec)


def stage_cost_closed_form_alpha0(dist_n: StageDistribution, b: float,
                                  limits: tuple[float, float]) -> float:
    """Exact alpha = 0 stage cost: the expected intervention magnitude.

    Gaussian only; the two band-violation tails reduce to one upper and one
    lower partial expectation of the net load.
    """
    if not isinstance(dist_n, Gaussian):
        raise UnsupportedModelError(
            f"closed form requires a Gaussian net-load model, got {type(dist_n).__name__}"
        )
    p_min, p_max = limits
    if not p_min < p_max:
        raise InputError(f"need p_min < p_max, got {limits}")
    return float(dist_n.upper_partial_expectation(p_max - b)
                 + dist_n.lower_partial_expectation(p_min - b))
