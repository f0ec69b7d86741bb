"""Per-mode generator blocks of the flat volte-face process.

On the plane ``V_n = {e^{inx} h(y)}`` the generator acts on the velocity
function ``h`` through the 2x2 matrix

    K_n = [[i n - a,  a      ],
           [a,       -i n - a]]

written in the basis (1_{y=+1}, 1_{y=-1}). Since the velocity marginal of the
invariant measure is uniform, rescaling both basis vectors by sqrt(2) makes
them orthonormal without changing the matrix, so operator norms are plain
spectral norms of 2x2 matrices.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

BOUNDARY_RTOL = 1e-9
TAYLOR_TERMS = 18


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""

    code = "domain"


class Regime(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    CRITICAL = "critical"
    OSCILLATORY = "oscillatory"


@dataclass(frozen=True)
class SpectralRegime:
    tag: Regime
    # sqrt((a/n)^2 - 1) when hyperbolic, nu_n = 2 sqrt(n^2 - a^2) when oscillatory.
    omega: float


@dataclass(frozen=True)
class ModeOperator:
    a: float
    n: float
    matrix: np.ndarray

    @property
    def regime(self) -> SpectralRegime:
        return classify(self.a, self.n)

    def eigenvalues(self) -> tuple[complex, complex]:
        s = _sqrt_disc(self.a, self.n)
        return (-self.a + s, -self.a - s)


@dataclass(frozen=True)
class ModeNormResult:
    r_value: float
    regime: SpectralRegime
    gamma: float | None = None
    auxiliary: float | None = None


def classify(a: float, n: float) -> SpectralRegime:
    n = abs(n)
    tol = BOUNDARY_RTOL * max(a, n)
    if a - n > tol:
        return SpectralRegime(Regime.HYPERBOLIC, math.sqrt((a / n) ** 2 - 1.0) if n else math.inf)
    if n - a > tol:
        return SpectralRegime(Regime.OSCILLATORY, 2.0 * math.sqrt((n - a) * (n + a)))
    return SpectralRegime(Regime.CRITICAL, 0.0)


def _sqrt_disc(a: float, n: float) -> complex:
    # principal sqrt(a^2 - n^2), factored to limit cancellation
    return cmath.sqrt((a - n) * (a + n))


def mode_matrix(a: float, n: float) -> np.ndarray:
    """Raw block for any real ``n`` (negative modes allowed)."""
    return np.array([[1j * n - a, a], [a, -1j * n - a]], dtype=complex)


def build_mode_operator(a: float, n: float) -> ModeOperator:
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if not (n > 0):
        raise DomainError(f"mode index must be positive, got n={n}")
    return ModeOperator(a=float(a), n=float(n), matrix=mode_matrix(a, n))


def mode_exp(op: ModeOperator, t: float) -> np.ndarray:
    """Closed-form ``exp(t K_n)``.

    With eigenvalues -a +/- s, Cayley-Hamilton gives
    ``e^{tK} = e^{-at} (cosh(st) I + sinh(st)/s (K + aI))``; ``s`` is real in
    the hyperbolic regime, imaginary in the oscillatory one and zero at the
    critical point, where the second coefficient degenerates to ``t`` (the
    nilpotent part of the Jordan block).
    """
    if t < 0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    a, n = op.a, op.n
    shifted = op.matrix + a * np.eye(2)
    reg = classify(a, n)
    if reg.tag is Regime.HYPERBOLIC:
        # fold e^{-at} into the hyperbolic functions so large s t cannot overflow
        s = math.sqrt((a - n) * (a + n))
        slow, fast = math.exp(-t * n * n / (a + s)), math.exp(-(a + s) * t)
        return 0.5 * (slow + fast) * np.eye(2) + (0.5 * (slow - fast) / s) * shifted
    if reg.tag is Regime.OSCILLATORY:
        w = 0.5 * reg.omega
        c0, c1 = math.cos(w * t), math.sin(w * t) / w
    else:
        c0, c1 = 1.0, t
    return math.exp(-a * t) * (c0 * np.eye(2) + c1 * shifted)


def expm_taylor(m: np.ndarray, terms: int = TAYLOR_TERMS) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a truncated Taylor series."""
    m = np.asarray(m, dtype=complex)
    norm = np.abs(m).sum(axis=1).max()
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    scaled = m / (2.0**squarings)
    result = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def _oscillation_factor(q: float) -> float:
    """``1 + 2/(sqrt(1/q + 1) - 1)`` rewritten so that q -> 0 and q -> inf are both safe."""
    return 1.0 + 2.0 * q + 2.0 * math.sqrt(q * (1.0 + q))


def _hyperbolic_factor(omega2: float, ratio: float, c: float) -> float:
    """``1 + 2/(w^2 c + r sqrt(1 + w^2 c^2) - 1)`` with ``r^2 = 1 + w^2``.

    The ``r sqrt(...) - 1`` part is rationalised since it cancels badly near
    the critical point.
    """
    root = math.sqrt(1.0 + omega2 * c * c)
    tail = omega2 * (1.0 + ratio * ratio * c * c) / (ratio * root + 1.0)
    return 1.0 + 2.0 / (omega2 * c + tail)


def oscillation_envelope(a: float, n: float, t: float) -> float:
    """The bounded oscillating factor ``g_n(t)`` of an oscillatory mode (n > a)."""
    n = abs(n)
    nu2 = 4.0 * (n - a) * (n + a)
    q = 4.0 * a * a * math.sin(0.5 * math.sqrt(nu2) * t) ** 2 / nu2
    return _oscillation_factor(q)


def mode_norm_squared_closed(a: float, n: float, t: float) -> ModeNormResult:
    """Squared norm of ``P_t - mu`` restricted to ``V_n``, in closed form."""
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    n = abs(float(n))
    if n == 0.0:
        reg = SpectralRegime(Regime.HYPERBOLIC, math.inf)
        return ModeNormResult(math.exp(-4.0 * a * t), reg, gamma=0.0)
    reg = classify(a, n)
    if t == 0:
        return ModeNormResult(1.0, reg, gamma=1.0 if reg.tag is Regime.HYPERBOLIC else None,
                              auxiliary=reg.omega)
    if reg.tag is Regime.HYPERBOLIC:
        s = math.sqrt((a - n) * (a + n))
        gamma = math.exp(-2.0 * s * t)
        c = 1.0 / math.tanh(s * t)  # (1 + gamma)/(1 - gamma)
        omega2 = (a / n) ** 2 - 1.0
        factor = _hyperbolic_factor(omega2, a / n, c)
        # a - s = n^2/(a + s) avoids cancellation when a >> n
        r = math.exp(-2.0 * t * n * n / (a + s)) * factor
        return ModeNormResult(r, reg, gamma=gamma, auxiliary=reg.omega)
    if reg.tag is Regime.OSCILLATORY:
        r = math.exp(-2.0 * a * t) * oscillation_envelope(a, n, t)
        return ModeNormResult(r, reg, auxiliary=reg.omega)
    q = (n * t) ** 2
    return ModeNormResult(math.exp(-2.0 * a * t) * _oscillation_factor(q), reg)


def mode_norm_squared_oracle(a: float, n: float, t: float) -> float:
    """Brute force: Taylor exponential of the block, then its top singular value squared."""
    e = expm_taylor(t * mode_matrix(a, n))
    return float(np.linalg.svd(e, compute_uv=False)[0] ** 2)


@dataclass(frozen=True)
class BrownianLimit:
    n: float
    t: float
    limit: float
    evaluator: Callable[[float], float]


def mode_norm_brownian_limit(n: float, t: float) -> BrownianLimit:
    """Large flip-rate limit of the mode norm under diffusive time scaling.

    ``evaluator(a)`` is the finite-rate norm ``sqrt(R(a t, a, n))`` of the
    process sped up by ``a``; it tends to ``exp(-n^2 t/2)``.
    """

    def evaluator(a: float) -> float:
        return math.sqrt(mode_norm_squared_closed(a, n, a * t).r_value)

    return BrownianLimit(n=n, t=t, limit=math.exp(-0.5 * n * n * t), evaluator=evaluator)
