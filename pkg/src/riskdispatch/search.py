"""Derivative-free scalar minimization used by the risk and DP layers.

Golden-section search, in a scalar form and in a vectorized form that shrinks
many independent brackets in lockstep (the per-element intervals all contract
by the golden ratio each iteration, so one loop serves the whole batch).
Both assume a unimodal objective on the bracket.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f: Callable[[float], float], lo: float, hi: float,
                       tol: float) -> float:
    """Return a point within `tol` of the minimizer of `f` on [lo, hi]."""
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def golden_section_min_vec(f: Callable[[np.ndarray], np.ndarray],
                           lo: np.ndarray, hi: np.ndarray,
                           tol: float) -> np.ndarray:
    """Elementwise golden-section minimization over per-element brackets.

    `f` maps an array of candidate points (one per bracket) to objective
    values of the same shape. Brackets may be degenerate (lo == hi).
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    while True:
        width = hi - lo
        if not np.any(width > tol):
            break
        c = hi - _INVPHI * width
        d = lo + _INVPHI * width
        fc = f(c)
        fd = f(d)
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    return 0.5 * (lo + hi)
