"""Operator norm of ``P_t - mu`` for the flat process: sup over Fourier modes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .mode_core import (
    DomainError,
    mode_norm_squared_closed,
    mode_norm_squared_oracle,
    oscillation_envelope,
)

MAX_ENVELOPE_MODES = 1 << 22
INTEGER_MODES = tuple(range(1, 51))
CROSSCHECK_MODES = INTEGER_MODES + tuple(k + 0.5 for k in range(10))


class Prefactor(enum.Enum):
    CONSTANT = "constant a^2/(a^2-1)"
    LINEAR = "linear 2t"
    OSCILLATING = "oscillating-bounded"


@dataclass(frozen=True)
class RateSummary:
    a: float
    rate: float
    prefactor_description: Prefactor
    eigen_rate: float

    @property
    def prefactor(self) -> float | None:
        if self.prefactor_description is Prefactor.CONSTANT:
            return self.a**2 / (self.a**2 - 1.0)
        return None


@dataclass(frozen=True)
class EnvelopeResult:
    t: float
    g_value: float
    attaining_mode: float | None
    n_modes: int
    truncation_bound: float
    certified: bool


@dataclass
class NormCurve:
    a: float
    samples: list[tuple[float, float, str]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def norms(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


def _envelope_modes(a: float, start: int, stop: int, half_integers: bool) -> np.ndarray:
    if half_integers:
        modes = 0.5 * np.arange(start, stop, dtype=float)
    else:
        modes = np.arange(start, stop, dtype=float)
    return modes[modes > a]


def envelope_g(a: float, t: float, half_integers: bool = False) -> EnvelopeResult:
    """``sup_n g_n(t)`` over the oscillatory modes, truncated with a certificate.

    Mode ``n`` can never exceed ``(n + a)/(n - a)``, which decreases in ``n``;
    once that ceiling falls below the running maximum no later mode matters.
    ``half_integers`` widens the mode set to ``n in N/2``.
    """
    if not (0 < a < 1):
        raise DomainError(f"the envelope is defined for 0 < a < 1, got a={a}")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    step = 0.5 if half_integers else 1.0
    first = (math.floor(a / step) + 1) * step
    nu_first = 2.0 * math.sqrt((first - a) * (first + a))
    if t <= math.pi / nu_first:
        # g_n = 1 + 2q + 2 sqrt(q(1+q)) with q = a^2 t^2 sinc^2(nu_n t/2); here the first
        # oscillatory mode has sinc >= 2/pi, which bounds every other mode's sinc
        nxt = first + step
        return EnvelopeResult(t, oscillation_envelope(a, first, t), first, 1, (nxt + a) / (nxt - a), True)
    best, best_mode = -math.inf, None
    start, chunk = 1, 64
    while True:
        stop = min(start + chunk, MAX_ENVELOPE_MODES + 1)
        modes = _envelope_modes(a, start, stop, half_integers)
        if modes.size:
            nu = 2.0 * np.sqrt((modes - a) * (modes + a))
            q = 4.0 * a * a * np.sin(0.5 * nu * t) ** 2 / (nu * nu)
            g = 1.0 + 2.0 * q + 2.0 * np.sqrt(q * (1.0 + q))
            i = int(np.argmax(g))
            if g[i] > best:
                best, best_mode = float(g[i]), float(modes[i])
            nxt = (modes[-1] + (0.5 if half_integers else 1.0))
            ceiling = (nxt + a) / (nxt - a)
            if ceiling <= best:
                return EnvelopeResult(t, best, best_mode, int(stop - 1), float(ceiling), True)
        if stop > MAX_ENVELOPE_MODES:
            nxt = stop * (0.5 if half_integers else 1.0)
            return EnvelopeResult(t, best, best_mode, int(stop - 1), float((nxt + a) / (nxt - a)), False)
        start, chunk = stop, chunk * 2


def global_operator_norm(a: float, t: float) -> float:
    """``||P_t - mu||`` on L^2(mu) for flip rate ``a``."""
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    if t == 0:
        return 1.0
    if a >= 1.0:
        return math.sqrt(mode_norm_squared_closed(a, 1.0, t).r_value)
    return math.exp(-a * t) * math.sqrt(envelope_g(a, t).g_value)


def global_operator_norm_oracle(a: float, t: float, modes: Iterable[float] = INTEGER_MODES) -> float:
    """Brute-force max of the per-mode oracle over a finite mode set.

    The circle only carries integer modes; pass ``CROSSCHECK_MODES`` to add the
    half-integers that appear in the limit of the discrete walk.
    """
    return max(math.sqrt(mode_norm_squared_oracle(a, n, t)) for n in modes)


def asymptotic_rate(a: float, n_modes: int = 50) -> RateSummary:
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if a > 1.0:
        rate = 1.0 / (a + math.sqrt((a - 1.0) * (a + 1.0)))  # a - sqrt(a^2 - 1)
        kind = Prefactor.CONSTANT
    elif a == 1.0:
        rate, kind = 1.0, Prefactor.LINEAR
    else:
        rate, kind = a, Prefactor.OSCILLATING
    # spectral cross-check: slowest real part among the nontrivial blocks
    eig = []
    for n in range(1, n_modes + 1):
        s = np.emath.sqrt((a - n) * (a + n))
        eig.extend([-a + s, -a - s])
    eigen_rate = float(min(-np.real(eig)))
    return RateSummary(a=a, rate=rate, prefactor_description=kind, eigen_rate=eigen_rate)


@dataclass(frozen=True)
class SmallTimeFit:
    a: float
    nominal: float
    series: float
    fitted: float

    def relative_gap(self, which: str = "nominal") -> float:
        ref = getattr(self, which)
        return abs(self.fitted - ref) / ref


def fit_cubic_onset(values: Sequence[float], times: Sequence[float]) -> float:
    """Least-squares ``c`` in ``1 - value = c t^3``."""
    t3 = np.asarray(times, dtype=float) ** 3
    y = 1.0 - np.asarray(values, dtype=float)
    return float(np.dot(y, t3) / np.dot(t3, t3))


def smalltime_coefficient(a: float, t_lo: float = 1e-3, t_hi: float = 1e-2, n: int = 40) -> SmallTimeFit:
    """Cubic onset of ``1 - ||P_t - mu||``.

    ``nominal`` is ``min(a, 1)/3``; ``series`` is ``a/6``, the coefficient
    obtained by expanding the mode-1 block to third order; ``fitted`` is the
    least-squares coefficient from the exact norm on ``[t_lo, t_hi]``.
    """
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    ts = np.geomspace(t_lo, t_hi, n)
    vals = [global_operator_norm(a, t) for t in ts]
    return SmallTimeFit(a=a, nominal=min(a, 1.0) / 3.0, series=a / 6.0, fitted=fit_cubic_onset(vals, ts))


@dataclass(frozen=True)
class LongtimeCheck:
    a: float
    rate: float
    times: np.ndarray
    norm_ratios: np.ndarray
    squared_ratios: np.ndarray
    amplitude_ratios: np.ndarray


def longtime_prefactor_check(a: float, t_grid: Sequence[float]) -> LongtimeCheck:
    """Compare the exact norm with its exponential asymptote for ``a > 1``.

    ``norm_ratios``   : ||P_t - mu|| / (a^2/(a^2-1) e^{-rate t})
    ``squared_ratios``: ||P_t - mu||^2 / (a^2/(a^2-1) e^{-2 rate t})
    ``amplitude_ratios``: ||P_t - mu|| / (a/sqrt(a^2-1) e^{-rate t})
    The constant a^2/(a^2-1) is the limit of the squared norm, so the last two
    series tend to 1 while the first tends to sqrt((a^2-1))/a.
    """
    if not (a > 1):
        raise DomainError(f"long-time prefactor needs a > 1, got a={a}")
    rate = asymptotic_rate(a).rate
    pref = a * a / ((a - 1.0) * (a + 1.0))
    ts = np.asarray(t_grid, dtype=float)
    norms = np.array([global_operator_norm(a, t) for t in ts])
    decay = np.exp(-rate * ts)
    return LongtimeCheck(
        a=a,
        rate=rate,
        times=ts,
        norm_ratios=norms / (pref * decay),
        squared_ratios=norms**2 / (pref * decay**2),
        amplitude_ratios=norms / (math.sqrt(pref) * decay),
    )


def sample_norm_curve(a: float, t_max: float, steps: int, source: str = "closed") -> NormCurve:
    """Sample ``t -> ||P_t - mu||`` on ``steps + 1`` equispaced points of [0, t_max]."""
    if t_max < 0 or steps < 0:
        raise DomainError("t_max and steps must be nonnegative")
    if source not in ("closed", "oracle"):
        raise DomainError(f"unknown source {source!r}")
    ts = [0.0] if t_max == 0 or steps == 0 else list(np.linspace(0.0, t_max, steps + 1))
    curve = NormCurve(a=a, metadata={"t_max": t_max, "steps": steps, "source": source})
    for t in ts:
        if source == "closed" or t == 0:
            value = global_operator_norm(a, t)
        else:
            value = global_operator_norm_oracle(a, t)
        curve.samples.append((float(t), value, source))
    return curve


def mode_of_max(a: float, t: float, modes: Iterable[float]) -> float:
    """Mode in ``modes`` with the largest closed-form restricted norm."""
    modes = list(modes)
    values = [mode_norm_squared_closed(a, n, t).r_value for n in modes]
    return modes[int(np.argmax(values))]


__all__ = [
    "EnvelopeResult",
    "LongtimeCheck",
    "NormCurve",
    "Prefactor",
    "RateSummary",
    "SmallTimeFit",
    "asymptotic_rate",
    "envelope_g",
    "fit_cubic_onset",
    "global_operator_norm",
    "global_operator_norm_oracle",
    "longtime_prefactor_check",
    "mode_of_max",
    "oscillation_envelope",
    "sample_norm_curve",
    "smalltime_coefficient",
]
