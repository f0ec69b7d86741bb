"""Small closed-form optimisation lemmas used by the mode-norm derivations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mode_core import DomainError


@dataclass(frozen=True)
class RationalQuadraticExtrema:
    a: float
    b: float
    r_plus: float
    r_minus: float
    f_plus: float
    f_minus: float


def optf(r, a: float, b: float):
    return (r - a) / (r * r + b)


def optf_extrema(a: float, b: float) -> RationalQuadraticExtrema:
    """Extrema of ``f(R) = (R - a)/(R^2 + b)``: located at ``a +/- sqrt(a^2 + b)``, value ``1/(2R)``."""
    if not (b > 0):
        raise DomainError(f"b must be positive, got b={b}")
    root = math.sqrt(a * a + b)
    r_plus = a + root
    # a - root = -b/(a + root): no cancellation for large positive a
    r_minus = -b / r_plus
    return RationalQuadraticExtrema(a, b, r_plus, r_minus, 0.5 / r_plus, 0.5 / r_minus)


def optg(theta, alpha: float, s: float):
    return (alpha + np.cos(theta - s)) / (alpha + np.cos(theta))


def optg_max(alpha: float, s: float) -> float:
    """``max_theta (alpha + cos(theta - s))/(alpha + cos theta)`` for alpha > 1."""
    if not (alpha > 1):
        raise DomainError(f"alpha must exceed 1, got alpha={alpha}")
    half = math.sin(0.5 * s) ** 2  # (1 - cos s)/2
    if half == 0.0:
        return 1.0
    q = half / ((alpha - 1.0) * (alpha + 1.0))
    return 1.0 + 2.0 * q + 2.0 * math.sqrt(q * (1.0 + q))


def _h(p: np.ndarray, s: float) -> np.ndarray:
    # (1 + e^{-ps})/(1 - e^{-ps}) = coth(ps/2)
    return p / ((1.0 - p) * (1.0 + p)) / np.tanh(0.5 * p * s)


def decroi_phi(p, s: float):
    """The auxiliary function whose monotonicity in ``p`` orders the hyperbolic mode norms."""
    p = np.asarray(p, dtype=float)
    h = _h(p, s)
    inv = 1.0 / ((1.0 - p) * (1.0 + p))
    denom = p * h + np.sqrt(h * h + inv) - 1.0
    return np.exp(p * s) * (1.0 + 2.0 / denom)


def decroi_endpoints(s: float) -> tuple[float, float]:
    """Limits of ``decroi_phi`` at p -> 0+ and p -> 1-."""
    return 1.0 + 2.0 / (math.sqrt(4.0 / (s * s) + 1.0) - 1.0), math.exp(s)


@dataclass(frozen=True)
class MonotonicityReport:
    s: float
    n_points: int
    violations: int
    max_violation: float
    endpoint_low: float
    endpoint_high: float

    @property
    def monotone(self) -> bool:
        return self.violations == 0


def decroi_monotonicity_check(s: float, p_grid=None, refine: int = 8) -> MonotonicityReport:
    """Check numerically that ``decroi_phi(., s)`` is non-decreasing on ``p_grid``.

    Where consecutive values are within a few ulps of each other the interval
    is re-sampled ``refine`` times so that near-flat stretches are inspected
    at a finer scale too.
    """
    if not (s > 0):
        raise DomainError(f"s must be positive, got s={s}")
    if p_grid is None:
        p_grid = np.linspace(0.0, 1.0, 1002)[1:-1]
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or p.size < 2 or p[0] <= 0 or p[-1] >= 1 or np.any(np.diff(p) <= 0):
        raise DomainError("p_grid must be strictly increasing inside (0, 1)")
    phi = decroi_phi(p, s)
    diffs = np.diff(phi)
    flat = np.nonzero(np.abs(diffs) <= 64 * np.finfo(float).eps * np.abs(phi[1:]))[0]
    pieces = [diffs]
    for i in flat:
        sub = np.linspace(p[i], p[i + 1], refine + 2)
        pieces.append(np.diff(decroi_phi(sub, s)))
    all_diffs = np.concatenate(pieces)
    # rounding noise is not a violation
    noise = 16 * np.finfo(float).eps * np.abs(phi).max()
    bad = all_diffs < -noise
    lo, hi = decroi_endpoints(s)
    return MonotonicityReport(
        s=s,
        n_points=int(p.size),
        violations=int(bad.sum()),
        max_violation=float(-all_diffs[bad].min()) if bad.any() else 0.0,
        endpoint_low=lo,
        endpoint_high=hi,
    )
