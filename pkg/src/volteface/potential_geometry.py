"""Periodic potentials and the time change that flattens them.

With speed ``e^{V(x)}`` the position moves so that ``Phi(X_t)``, where
``Phi(x) = int_0^x e^{-V(u)} du``, has unit speed: the process is the flat one
seen through ``Phi^{-1}``. Eigenfunctions become ``exp(i n Phi(x))`` and all
operator norms reduce to the flat case, up to a rescaling by
``Z = int e^{-V}/(2 pi)`` when ``V`` is not normalised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .global_norm import global_operator_norm
from .mode_core import DomainError

DEFAULT_LOG2_GRID = 12
NORMALIZED_ATOL = 1e-10
BISECTION_XTOL = 1e-12


class PotentialInputError(DomainError):
    code = "potential-input"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Potential:
    """A potential tabulated on ``2^m`` equispaced points of [0, 2 pi)."""

    values: np.ndarray
    name: str = "custom"
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 8:
            raise PotentialInputError("potential needs a 1-d table of at least 8 samples")
        if not np.all(np.isfinite(v)):
            raise PotentialInputError("potential samples must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_callable(cls, v: Callable[[np.ndarray], np.ndarray], m: int = DEFAULT_LOG2_GRID,
                      name: str = "custom", periodic_tol: float = 1e-8) -> "Potential":
        ends = np.asarray(v(np.array([0.0, 2.0 * math.pi])), dtype=float)
        if not np.all(np.isfinite(ends)) or abs(ends[0] - ends[1]) > periodic_tol:
            raise PotentialInputError(f"potential is not 2pi-periodic: V(0)={ends[0]}, V(2pi)={ends[1]}")
        x = grid(m)
        return cls(np.asarray(v(x), dtype=float) * np.ones_like(x), name=name, func=v)

    @classmethod
    def zero(cls, m: int = DEFAULT_LOG2_GRID) -> "Potential":
        return cls.from_callable(lambda x: np.zeros_like(x), m, name="zero")

    @classmethod
    def constant(cls, c: float, m: int = DEFAULT_LOG2_GRID) -> "Potential":
        return cls.from_callable(lambda x: np.full_like(x, c), m, name=f"constant({c})")

    @classmethod
    def cosine(cls, amplitude: float = 1.0, m: int = DEFAULT_LOG2_GRID) -> "Potential":
        return cls.from_callable(lambda x: amplitude * np.cos(x), m, name=f"cosine({amplitude})")

    @classmethod
    def trig(cls, cos_coeffs: Sequence[float] = (), sin_coeffs: Sequence[float] = (),
             m: int = DEFAULT_LOG2_GRID) -> "Potential":
        """``V(x) = c_0 + sum_k c_k cos(kx) + s_k sin(kx)``; ``sin_coeffs[0]`` multiplies ``sin(x)``."""
        c = list(cos_coeffs)
        s = list(sin_coeffs)

        def v(x):
            x = np.asarray(x, dtype=float)
            out = np.full_like(x, c[0] if c else 0.0)
            for k, ck in enumerate(c[1:], start=1):
                out = out + ck * np.cos(k * x)
            for k, sk in enumerate(s, start=1):
                out = out + sk * np.sin(k * x)
            return out

        return cls.from_callable(v, m, name=f"trig(cos={c}, sin={s})")

    @classmethod
    def from_samples(cls, x: Sequence[float], v: Sequence[float], m: int = DEFAULT_LOG2_GRID) -> "Potential":
        """Resample arbitrary ``(x, V(x))`` samples onto the grid by periodic linear interpolation."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.shape != v.shape or x.ndim != 1 or x.size < 2:
            raise PotentialInputError("samples must be two equal-length columns")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise PotentialInputError("potential samples must be finite")
        order = np.argsort(x % (2 * math.pi))
        xs, vs = (x % (2 * math.pi))[order], v[order]
        return cls(np.interp(grid(m), xs, vs, period=2 * math.pi), name="samples")

    @classmethod
    def from_file(cls, path: str | Path, m: int = DEFAULT_LOG2_GRID) -> "Potential":
        try:
            data = np.loadtxt(path, delimiter=None, comments="#", ndmin=2)
        except ValueError as exc:
            raise PotentialInputError(f"cannot parse potential file {path}: {exc}") from exc
        if data.shape[1] != 2:
            raise PotentialInputError(f"expected two columns (x, V), got {data.shape[1]}")
        return cls.from_samples(data[:, 0], data[:, 1], m)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.size) / self.size

    @property
    def weight(self) -> np.ndarray:
        return np.exp(-self.values)

    @property
    def Z(self) -> float:
        # periodic trapezoid rule: plain mean on the uniform grid
        return float(self.weight.mean())

    @property
    def is_normalized(self) -> bool:
        return abs(self.Z - 1.0) <= NORMALIZED_ATOL

    def __call__(self, x) -> np.ndarray:
        if self.func is not None:
            return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x, dtype=float)
        return np.interp(np.asarray(x, dtype=float) % (2 * math.pi), self.x, self.values, period=2 * math.pi)

    def shifted(self, c: float) -> "Potential":
        func = None if self.func is None else (lambda x, f=self.func: f(x) + c)
        return Potential(self.values + c, name=self.name, func=func)


def grid(m: int) -> np.ndarray:
    size = 1 << m
    return 2.0 * math.pi * np.arange(size) / size


def normalize_potential(raw: Potential) -> tuple[Potential, float]:
    """Shift ``V`` by ``log Z`` so that ``e^{-V} dx/(2 pi)`` is a probability; returns the original ``Z``."""
    z = raw.Z
    if not (z > 0 and math.isfinite(z)):
        raise PotentialInputError(f"normalisation constant must be positive and finite, got {z}")
    if z == 1.0:
        return raw, z
    return raw.shifted(math.log(z)), z


class TimeChange:
    """``Phi(x) = int_0^x e^{-V}`` and its inverse.

    The periodic part of ``e^{-V}`` is integrated spectrally on the grid and a
    periodic cubic spline carries it between nodes; ``inverse`` bisects the
    same interpolant, so ``phi(inverse(w)) == w`` to the bisection tolerance.
    """

    def __init__(self, pot: Potential):
        self.potential = pot
        w = pot.weight
        size = w.size
        coeffs = np.fft.rfft(w) / size
        self.Z = float(coeffs[0].real)
        k = np.arange(coeffs.size)
        integ = np.zeros_like(coeffs)
        integ[1:] = coeffs[1:] / (1j * k[1:])
        if size % 2 == 0:
            integ[-1] = 0.0
        periodic = np.fft.irfft(integ * size, n=size)
        periodic -= periodic[0]
        x = np.append(pot.x, 2.0 * math.pi)
        self._periodic = CubicSpline(x, np.append(periodic, periodic[0]), bc_type="periodic")
        self.period = 2.0 * math.pi * self.Z  # Phi(2 pi)

    def phi(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.Z * x + self._periodic(np.mod(x, 2.0 * math.pi))

    def phi_nodes(self) -> np.ndarray:
        return self.phi(self.potential.x)

    def inverse(self, w, xtol: float = BISECTION_XTOL) -> np.ndarray:
        """``Phi^{-1}`` on ``[0, Phi(2 pi)]`` by vectorised bisection (``Phi`` is strictly increasing)."""
        w = np.asarray(w, dtype=float)
        lo = np.zeros_like(w)
        hi = np.full_like(w, 2.0 * math.pi)
        iters = int(math.ceil(math.log2(2.0 * math.pi / xtol))) + 1
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            below = self._phi_raw(mid) < w
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _phi_raw(self, x: np.ndarray) -> np.ndarray:
        # no modular reduction: x stays in [0, 2 pi]
        return self.Z * x + self._periodic(x)

    def wrap(self, w) -> np.ndarray:
        return np.mod(w, self.period)


def time_change(pot: Potential) -> TimeChange:
    return TimeChange(pot)


def eigenfunction(pot: Potential, n: int, tc: TimeChange | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """``x -> exp(i n Phi(x)/Z)``: the position factor of the n-th invariant plane."""
    tc = tc or TimeChange(pot)
    return lambda x: np.exp(1j * n * tc.phi(x) / tc.Z)


def eigenfunction_overlap(pot: Potential, n: int, k: int) -> complex:
    """``int_0^{2pi} g_n conj(g_k) e^{-V} dx`` by the periodic trapezoid rule (unnormalised: 2 pi delta_nk)."""
    if not pot.is_normalized:
        raise DomainError("eigenfunction overlaps are defined for a normalised potential")
    tc = TimeChange(pot)
    phase = tc.phi_nodes()
    integrand = np.exp(1j * (n - k) * phase) * pot.weight
    return complex(2.0 * math.pi * integrand.mean())


def overlap_matrix(pot: Potential, n_max: int) -> np.ndarray:
    idx = range(1, n_max + 1)
    return np.array([[eigenfunction_overlap(pot, n, k) for k in idx] for n in idx])


def effective_parameters(pot: Potential, a: float, t: float) -> tuple[float, float]:
    """Flat-process ``(rate, time)`` with the same norm: ``(a Z, t / Z)``."""
    z = 1.0 if pot.is_normalized else pot.Z
    return a * z, t / z


def norm_with_potential(pot: Potential, a: float, t: float) -> float:
    """``||P^V_t - mu||`` on L^2(mu), equal to a flat norm at rescaled parameters."""
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    rate, time = effective_parameters(pot, a, t)
    return global_operator_norm(rate, time)


def optimal_rate_parameter(pot: Potential) -> float:
    return 1.0 / pot.Z


def product_norm(potentials: Sequence[Potential], a: float, t: float) -> float:
    """Product over coordinates of the per-coordinate ``||P^{V_i}_t - mu_i||``."""
    if not potentials:
        raise DomainError("product_norm needs at least one coordinate potential")
    out = 1.0
    for pot in potentials:
        out *= norm_with_potential(pot, a, t)
    return out


def product_distance_norm(potentials: Sequence[Potential], a: float, t: float) -> float:
    """``||P_t - mu||`` for the product process.

    ``P_t - mu`` splits orthogonally into tensor products of ``P_i - mu_i`` on a
    nonempty subset of coordinates and ``mu_i`` elsewhere; each piece has norm
    at most one factor's norm, so the whole is the largest coordinate norm.
    """
    if not potentials:
        raise DomainError("product_distance_norm needs at least one coordinate potential")
    return max(norm_with_potential(pot, a, t) for pot in potentials)
