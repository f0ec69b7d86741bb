"""Order-2 persistent random walk on Z_N x {-1, +1}.

One step moves ``X <- X + Y`` and then keeps ``Y`` with probability
``(1 + alpha)/2`` (flips it otherwise). The Fourier planes
``W_k = {e^{2 i pi k x/N} g(y)}`` are invariant and on each of them the
transition operator is the 2x2 block ``diag(e^{i theta_k}, e^{-i theta_k}) P``
with ``P = [[(1+alpha)/2, (1-alpha)/2], [(1-alpha)/2, (1+alpha)/2]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .mode_core import DomainError, Regime, _hyperbolic_factor, _oscillation_factor, mode_norm_squared_closed

BOUNDARY_RTOL = 1e-9
DENSE_ORACLE_MAX_N = 31


@dataclass(frozen=True)
class ChainSpec:
    N: int
    alpha: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 3 or self.N % 2 == 0:
            raise DomainError(f"N must be an odd integer >= 3, got N={self.N}")
        if not (0 <= self.alpha < 1):
            raise DomainError(f"alpha must lie in [0, 1), got alpha={self.alpha}")

    @property
    def flip_probability(self) -> float:
        return 0.5 * (1.0 - self.alpha)

    @property
    def c0(self) -> float:
        return 2.0 * math.sqrt(self.alpha) / (1.0 + self.alpha)

    @property
    def s0(self) -> float:
        return (1.0 - self.alpha) / (1.0 + self.alpha)

    def ck(self, k: int) -> float:
        return math.cos(2.0 * math.pi * k / self.N)

    def sk(self, k: int) -> float:
        return math.sin(2.0 * math.pi * k / self.N)

    def alpha_k(self, k: int) -> float:
        s = abs(self.sk(k))
        return (1.0 - s) / (1.0 + s)


@dataclass(frozen=True)
class DiscreteModeNorm:
    n_steps: int
    k: int
    r_value: float
    regime: Regime


def mode_block(spec: ChainSpec, k: int) -> np.ndarray:
    """Matrix of the one-step operator on ``W_k`` (orthonormal velocity coordinates)."""
    if not (0 <= k <= spec.N - 1):
        raise DomainError(f"mode must lie in 0..{spec.N - 1}, got k={k}")
    theta = 2.0 * math.pi * k / spec.N
    p, q = 0.5 * (1.0 + spec.alpha), 0.5 * (1.0 - spec.alpha)
    phase = np.array([np.exp(1j * theta), np.exp(-1j * theta)])
    return phase[:, None] * np.array([[p, q], [q, p]])


def classify_mode(spec: ChainSpec, k: int) -> Regime:
    ak = spec.alpha_k(k)
    tol = BOUNDARY_RTOL * max(ak, spec.alpha, 1e-300)
    if ak - spec.alpha > tol:
        return Regime.HYPERBOLIC
    if spec.alpha - ak > tol:
        return Regime.OSCILLATORY
    return Regime.CRITICAL


def _block_power_norm_squared(block: np.ndarray, n: int) -> float:
    return float(np.linalg.svd(np.linalg.matrix_power(block, n), compute_uv=False)[0] ** 2)


def discrete_mode_norm_closed(spec: ChainSpec, k: int, n_steps: int) -> DiscreteModeNorm:
    """Squared norm of ``M^n - mu_N`` restricted to ``W_k``, ``1 <= k <= N//2``."""
    half = spec.N // 2
    if not (1 <= k <= half):
        raise DomainError(f"closed form covers 1 <= k <= {half}, got k={k}")
    if n_steps < 0:
        raise DomainError(f"n_steps must be nonnegative, got {n_steps}")
    regime = classify_mode(spec, k)
    if n_steps == 0:
        return DiscreteModeNorm(0, k, 1.0, regime)
    alpha, n = spec.alpha, int(n_steps)
    if alpha == 0.0:
        # C_0 = 0 makes the closed form singular: isotropic walk handled directly
        return DiscreteModeNorm(n, k, _block_power_norm_squared(mode_block(spec, k), n), regime)
    c0, s0 = spec.c0, spec.s0
    ck, sk = abs(spec.ck(k)), abs(spec.sk(k))
    if regime is Regime.HYPERBOLIC:
        x = ck / c0
        root = math.sqrt((x - 1.0) * (x + 1.0))
        lam_plus = math.sqrt(alpha) * (x + root)
        # log(lambda_-/lambda_+) from the gap, stable when the two merge
        log_ratio = math.log1p(-2.0 * math.sqrt(alpha) * root / lam_plus)
        c = -1.0 / math.tanh(0.5 * n * log_ratio)  # (1 + gamma)/(1 - gamma)
        ratio = s0 / sk
        omega2 = (s0 - sk) * (s0 + sk) / (sk * sk)
        r = math.exp(2 * n * math.log(lam_plus)) * _hyperbolic_factor(omega2, ratio, c)
        return DiscreteModeNorm(n, k, r, regime)
    if regime is Regime.OSCILLATORY:
        psi = math.atan(math.sqrt((c0 - ck) * (c0 + ck)) / ck)
        # 2 (rho^2 - 1)/(1 - cos 2n psi) = (rho^2 - 1)/sin^2(n psi), rho = S_k/S_0
        q = math.sin(n * psi) ** 2 * s0 * s0 / ((sk - s0) * (sk + s0))
        return DiscreteModeNorm(n, k, alpha**n * _oscillation_factor(q), regime)
    q = (s0 * n / c0) ** 2
    return DiscreteModeNorm(n, k, alpha**n * _oscillation_factor(q), regime)


def discrete_mode_norm_oracle(spec: ChainSpec, k: int, n_steps: int) -> float:
    """Matrix power of the 2x2 block followed by its top singular value squared."""
    return _block_power_norm_squared(mode_block(spec, k), n_steps)


def discrete_mode_norm(spec: ChainSpec, k: int, n_steps: int) -> float:
    """Squared restricted norm for any mode ``k`` in Z_N (folded onto 0..N//2)."""
    k = int(k) % spec.N
    k = min(k, spec.N - k)
    if k == 0:
        return spec.alpha ** (2 * n_steps)
    return discrete_mode_norm_closed(spec, k, n_steps).r_value


def discrete_global_norm(spec: ChainSpec, n_steps: int, exclude_top_modes: bool = False) -> float:
    """``||M^n - mu_N||`` on L^2(mu_N), optionally with the two top Fourier planes removed."""
    if n_steps < 0:
        raise DomainError(f"n_steps must be nonnegative, got {n_steps}")
    if n_steps == 0:
        return 1.0
    half = spec.N // 2
    last = half - 1 if exclude_top_modes else half
    best = spec.alpha ** (2 * n_steps)
    for k in range(1, last + 1):
        best = max(best, discrete_mode_norm_closed(spec, k, n_steps).r_value)
    return math.sqrt(best)


def transition_matrix(spec: ChainSpec) -> np.ndarray:
    """Dense ``2N x 2N`` transition matrix; state index ``2 x + (0 if y = +1 else 1)``."""
    N = spec.N
    p, q = 0.5 * (1.0 + spec.alpha), 0.5 * (1.0 - spec.alpha)
    m = np.zeros((2 * N, 2 * N))
    for x in range(N):
        for iy, y in enumerate((1, -1)):
            nx = (x + y) % N
            m[2 * x + iy, 2 * nx + iy] += p
            m[2 * x + iy, 2 * nx + (1 - iy)] += q
    return m


def _integer_transition(spec: ChainSpec) -> tuple[np.ndarray, int]:
    """``(A, D)`` with ``M = A / D`` exactly; floats are dyadic rationals so this is lossless."""
    frac = Fraction(spec.alpha)
    p, q = (1 + frac) / 2, (1 - frac) / 2
    denom = math.lcm(p.denominator, q.denominator)
    N = spec.N
    a = np.zeros((2 * N, 2 * N), dtype=object)
    a[:, :] = 0
    ip, iq = int(p * denom), int(q * denom)
    for x in range(N):
        for iy, y in enumerate((1, -1)):
            nx = (x + y) % N
            a[2 * x + iy, 2 * nx + iy] += ip
            a[2 * x + iy, 2 * nx + (1 - iy)] += iq
    return a, denom


def dense_residuals(spec: ChainSpec, n_max: int):
    """Yield ``M^n - 1 mu_N^T`` for n = 0..n_max, each entry exact up to one final rounding.

    The powers are formed in integer arithmetic; subtracting the projection in
    floating point would cancel catastrophically once the norm nears 1e-16.
    """
    if spec.N > DENSE_ORACLE_MAX_N:
        raise DomainError(f"dense oracle limited to N <= {DENSE_ORACLE_MAX_N}")
    a, denom = _integer_transition(spec)
    two_n = 2 * spec.N
    power = np.identity(two_n, dtype=int).astype(object)
    scale = 1
    for n in range(n_max + 1):
        if n:
            power = power.dot(a)
            scale *= denom
        num = power * two_n - scale
        yield np.array([[v / (two_n * scale) for v in row] for row in num], dtype=float)


def dense_global_norm_oracle(spec: ChainSpec, n_steps: int) -> float:
    """Top singular value of ``M^n - 1 mu_N^T`` from the dense ``2N x 2N`` matrix."""
    *_, last = dense_residuals(spec, n_steps)
    return float(np.linalg.svd(last, compute_uv=False)[0])


def dense_global_norms_oracle(spec: ChainSpec, n_max: int) -> np.ndarray:
    return np.array([np.linalg.svd(r, compute_uv=False)[0] for r in dense_residuals(spec, n_max)])


def _wave_basis(N: int, k: int) -> np.ndarray:
    basis = np.zeros((2 * N, 2), dtype=complex)
    wave = np.exp(2j * np.pi * k * np.arange(N) / N) / math.sqrt(N)
    basis[0::2, 0] = wave
    basis[1::2, 1] = wave
    return basis


def dense_mode_norms_oracle(spec: ChainSpec, n_steps: int) -> np.ndarray:
    """Squared restricted norms for k = 0..N//2 by projecting the dense residual onto each ``W_k``.

    Accurate relative to the global norm only; modes far below it lose digits.
    """
    *_, res = dense_residuals(spec, n_steps)
    out = []
    for k in range(spec.N // 2 + 1):
        basis = _wave_basis(spec.N, k)
        block = basis.conj().T @ res @ basis
        out.append(float(np.linalg.svd(block, compute_uv=False)[0] ** 2))
    return np.array(out)


def projected_block(spec: ChainSpec, k: int) -> np.ndarray:
    """``W_k`` block extracted from the dense one-step matrix."""
    basis = _wave_basis(spec.N, k)
    return basis.conj().T @ transition_matrix(spec) @ basis


@dataclass(frozen=True)
class OptimalPersistence:
    N: int
    alpha_opt: float
    lambda_opt: float
    lambda_iso: float


def optimal_persistence(N: int) -> OptimalPersistence:
    if not isinstance(N, (int, np.integer)) or N < 3 or N % 2 == 0:
        raise DomainError(f"N must be an odd integer >= 3, got N={N}")
    s = math.sin(math.pi / N)
    alpha_opt = (1.0 - s) / (1.0 + s)
    lam_opt = math.sqrt(alpha_opt)
    lam_iso = math.cos(math.pi / N)
    assert lam_opt <= lam_iso
    return OptimalPersistence(N, alpha_opt, lam_opt, lam_iso)


def subdominant_radius(N: int, alpha=None, dps: int = 50) -> float:
    """Largest eigenvalue modulus of ``M_alpha`` other than the constant eigenvalue 1.

    Eigenvalues of every 2x2 block are solved in ``mpmath`` at ``dps``
    digits; the double root at the critical persistence is otherwise only
    resolved to about sqrt(machine epsilon). ``alpha=None`` means the optimal
    persistence, built in extended precision from ``N``.
    """
    import mpmath

    with mpmath.workdps(dps):
        if alpha is None:
            s = mpmath.sin(mpmath.pi / N)
            alpha = (1 - s) / (1 + s)
        alpha = mpmath.mpf(alpha)
        best = alpha  # W_0 minus constants
        for k in range(1, N // 2 + 1):
            c = mpmath.cos(2 * mpmath.pi * k / N)
            tr = (1 + alpha) * c
            disc = tr * tr - 4 * alpha
            if disc <= 0:
                mod = mpmath.sqrt(alpha)
            else:
                mod = (abs(tr) + mpmath.sqrt(disc)) / 2
            best = max(best, mod)
        return float(best)


def block_eigenvalue_moduli(spec: ChainSpec) -> np.ndarray:
    """Double-precision eigenvalue moduli of all blocks k = 0..N//2 (two per block)."""
    mods = [np.abs(np.linalg.eigvals(mode_block(spec, k))) for k in range(spec.N // 2 + 1)]
    return np.sort(np.concatenate(mods))[::-1]


def continuum_alpha(a: float, N: int) -> float:
    """Persistence whose per-unit-time flip rate tends to ``a`` as N grows: ``1 - 4 pi a/N`` clipped."""
    return min(max(1.0 - 4.0 * math.pi * a / N, 0.0), math.nextafter(1.0, 0.0))


def steps_for_time(N: int, t: float) -> int:
    return int(math.floor(N * t / (2.0 * math.pi)))


@dataclass(frozen=True)
class ContinuumRow:
    N: int
    alpha: float
    n_steps: int
    mode: int
    discrete: float
    continuous: float

    @property
    def error(self) -> float:
        return abs(self.discrete - self.continuous)


def continuum_limit_check(a: float, k: int, t: float, N_list: Sequence[int], top: bool = False) -> list[ContinuumRow]:
    """Discrete squared mode norms at ``floor(N t/2pi)`` steps against their continuous limits.

    ``top=False`` follows the fixed mode ``k`` (target ``R(t, a, k)``); ``top=True``
    follows ``N//2 - k`` (target ``R(t, a, k + 1/2)``).
    """
    rows = []
    target_mode = k + 0.5 if top else float(k)
    target = mode_norm_squared_closed(a, target_mode, t).r_value
    for N in N_list:
        alpha = continuum_alpha(a, N)
        spec = ChainSpec(int(N), alpha)
        n = steps_for_time(N, t)
        mode = N // 2 - k if top else k
        value = discrete_mode_norm(spec, mode, n)
        rows.append(ContinuumRow(int(N), alpha, n, mode, value, target))
    return rows


def continuum_limit_norm(a: float, t: float, half_integers: bool = True, n_max: int = 200) -> float:
    """Limit of the discrete global norm: sup over integer (and half-integer) modes of sqrt R(t, a, n)."""
    step = 0.5 if half_integers else 1.0
    modes = np.arange(step, n_max + step / 2, step)
    return math.sqrt(max(mode_norm_squared_closed(a, float(n), t).r_value for n in modes))


def crossover_steps(N: int) -> int:
    """First step count where ``1 - t^3/3`` (t = 2 pi n/N) drops below ``1 - t/2`` (t = n (2 pi/N)^2)."""
    h = 2.0 * math.pi / N
    n = 1
    while 1.0 - (n * h) ** 3 / 3.0 >= 1.0 - n * h * h / 2.0:
        n += 1
    return n
