"""Seeded Monte Carlo for the volte-face process, its potential variant and the persistent walk.

Every path owns a random stream keyed by ``(master_seed, path_index)``, so a
batch is identical however its paths are split across workers.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import integrate, stats

from . import _core
from .discrete_chain import ChainSpec, mode_block
from .mode_core import DomainError, build_mode_operator, mode_exp, mode_norm_brownian_limit
from .potential_geometry import Potential, TimeChange

TWO_PI = 2.0 * math.pi
MAX_SEED = (1 << 64) - 1


@dataclass
class TrajectoryBatch:
    model: str
    master_seed: int
    n_paths: int
    horizon: float
    x: np.ndarray
    y: np.ndarray
    n_jumps: np.ndarray
    params: dict = field(default_factory=dict)
    displacement: np.ndarray | None = None
    flat_coordinate: np.ndarray | None = None
    jump_offsets: np.ndarray | None = None
    jump_times: np.ndarray | None = None

    def events(self, path: int) -> np.ndarray:
        if self.jump_times is None:
            raise ValueError("batch was simulated without event logs")
        return self.jump_times[self.jump_offsets[path]:self.jump_offsets[path + 1]]


@dataclass(frozen=True)
class McEstimate:
    value: complex
    std_error: float
    n_paths: int


def estimate(samples: np.ndarray) -> McEstimate:
    """Sample mean with standard error ``std/sqrt(n)`` (complex samples: std of ``|z - mean|``)."""
    z = np.asarray(samples)
    n = z.size
    mean = z.mean()
    sd = math.sqrt(float(np.sum(np.abs(z - mean) ** 2)) / (n - 1)) if n > 1 else 0.0
    return McEstimate(complex(mean), sd / math.sqrt(n), n)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed <= MAX_SEED):
        raise DomainError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def _check_velocity(y0: int) -> int:
    if y0 not in (1, -1):
        raise DomainError(f"initial velocity must be +1 or -1, got {y0}")
    return int(y0)


def _chunks(n_paths: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(int(workers), n_paths or 1))
    bounds = np.linspace(0, n_paths, workers + 1).astype(int)
    return [(int(lo), int(hi - lo)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _run_chunks(fn, n_paths: int, workers: int):
    parts = _chunks(n_paths, workers)
    if len(parts) <= 1:
        return [fn(lo, size) for lo, size in parts]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(lambda p: fn(*p), parts))


def _flat_core(a, T, y0, n_paths, seed, workers, record_events, backend):
    k = _core.load_backend(backend) if backend else _core.kernels
    parts = _run_chunks(lambda lo, size: k.flat_paths(seed, lo, size, float(a), float(T), y0), n_paths, workers)
    if parts:
        disp, vel, jumps = (np.concatenate(c) for c in zip(*parts))
    else:
        disp, vel, jumps = np.zeros(0), np.zeros(0, np.int8), np.zeros(0, np.int64)
    offsets = times = None
    if record_events:
        offsets = np.zeros(n_paths + 1, dtype=np.int64)
        np.cumsum(jumps, out=offsets[1:])
        times = np.asarray(k.flat_jump_times(seed, 0, n_paths, float(a), float(T), offsets))
    return disp, vel, jumps, offsets, times


def simulate_flat(a: float, x0: float, y0: int, T: float, n_paths: int, seed: int,
                  workers: int = 1, record_events: bool = False, backend: str | None = None) -> TrajectoryBatch:
    """Exact event-driven simulation of the flat process on the circle."""
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if T < 0:
        raise DomainError(f"horizon must be nonnegative, got T={T}")
    y0, seed = _check_velocity(y0), _check_seed(seed)
    disp, vel, jumps, offsets, times = _flat_core(a, T, y0, n_paths, seed, workers, record_events, backend)
    x = np.mod(x0 + disp, TWO_PI)
    return TrajectoryBatch("flat", seed, n_paths, float(T), x, vel, jumps,
                           params={"a": a, "x0": x0, "y0": y0}, displacement=disp,
                           jump_offsets=offsets, jump_times=times)


def simulate_with_potential(pot: Potential, a: float, x0: float, y0: int, T: float, n_paths: int, seed: int,
                            workers: int = 1, record_events: bool = False, backend: str | None = None,
                            time_change: TimeChange | None = None) -> TrajectoryBatch:
    """Simulate ``dX = Y e^{V(X)} dt`` exactly: run the flat process in ``Phi`` coordinates and map back."""
    if not (a > 0):
        raise DomainError(f"flip rate must be positive, got a={a}")
    if T < 0:
        raise DomainError(f"horizon must be nonnegative, got T={T}")
    y0, seed = _check_velocity(y0), _check_seed(seed)
    tc = time_change or TimeChange(pot)
    disp, vel, jumps, offsets, times = _flat_core(a, T, y0, n_paths, seed, workers, record_events, backend)
    w = tc.wrap(float(tc.phi(x0)) + disp)
    x = tc.inverse(w)
    return TrajectoryBatch("potential", seed, n_paths, float(T), x, vel, jumps,
                           params={"a": a, "x0": x0, "y0": y0, "potential": pot.name},
                           displacement=disp, flat_coordinate=w, jump_offsets=offsets, jump_times=times)


def simulate_chain(spec: ChainSpec, x0: int, y0: int, n_steps: int, n_paths: int, seed: int,
                   workers: int = 1, backend: str | None = None) -> TrajectoryBatch:
    """Persistent walk: move by the current velocity, then flip it with probability ``(1 - alpha)/2``."""
    if n_steps < 0:
        raise DomainError(f"n_steps must be nonnegative, got {n_steps}")
    y0, seed = _check_velocity(y0), _check_seed(seed)
    k = _core.load_backend(backend) if backend else _core.kernels
    x0 = int(x0) % spec.N
    parts = _run_chunks(
        lambda lo, size: k.chain_paths(seed, lo, size, spec.flip_probability, int(n_steps), spec.N, x0, y0),
        n_paths, workers)
    pos, vel, flips = (np.concatenate(c) for c in zip(*parts))
    return TrajectoryBatch("chain", seed, n_paths, float(n_steps), pos, vel, flips,
                           params={"N": spec.N, "alpha": spec.alpha, "x0": x0, "y0": y0})


def _velocity_index(y0: int) -> int:
    return 0 if y0 == 1 else 1


def _h_values(h: Sequence[complex], y: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return np.where(y == 1, h[0], h[1])


def _block_exp(a: float, n: int, t: float) -> np.ndarray:
    return mode_exp(build_mode_operator(a, n), t)


@dataclass(frozen=True)
class SemigroupComparison:
    estimate: McEstimate
    exact: complex

    @property
    def gap(self) -> float:
        return abs(self.estimate.value - self.exact)

    def within(self, n_se: float) -> bool:
        return self.gap <= n_se * self.estimate.std_error


def flat_semigroup_check(a: float, n: int, h: Sequence[complex], x0: float, y0: int, T: float,
                         n_paths: int, seed: int, **kw) -> SemigroupComparison:
    """``E[e^{i n X_T} h(Y_T)]`` against ``e^{i n x0} (e^{T K_n} h)(y0)``."""
    batch = simulate_flat(a, x0, y0, T, n_paths, seed, **kw)
    samples = np.exp(1j * n * batch.x) * _h_values(h, batch.y)
    exact = np.exp(1j * n * x0) * (_block_exp(a, n, T) @ np.asarray(h, dtype=complex))[_velocity_index(y0)]
    return SemigroupComparison(estimate(samples), complex(exact))


def potential_semigroup_check(pot: Potential, a: float, n: int, h: Sequence[complex], x0: float, y0: int,
                              T: float, n_paths: int, seed: int, **kw) -> SemigroupComparison:
    """``E[g_n(X_T) h(Y_T)]`` against ``g_n(x0) (e^{(T/Z) K_n^{(aZ)}} h)(y0)``, ``g_n = e^{i n Phi/Z}``."""
    tc = TimeChange(pot)
    batch = simulate_with_potential(pot, a, x0, y0, T, n_paths, seed, time_change=tc, **kw)
    g = np.exp(1j * n * tc.phi(batch.x) / tc.Z)
    samples = g * _h_values(h, batch.y)
    z = tc.Z
    block = _block_exp(a * z, n, T / z)
    exact = np.exp(1j * n * float(tc.phi(x0)) / z) * (block @ np.asarray(h, dtype=complex))[_velocity_index(y0)]
    return SemigroupComparison(estimate(samples), complex(exact))


def chain_semigroup_check(spec: ChainSpec, k: int, g: Sequence[complex], x0: int, y0: int, n_steps: int,
                          n_paths: int, seed: int, **kw) -> SemigroupComparison:
    """``E[e^{2 i pi k X_n/N} g(Y_n)]`` against ``e^{2 i pi k x0/N} (B_k^n g)(y0)``."""
    batch = simulate_chain(spec, x0, y0, n_steps, n_paths, seed, **kw)
    samples = np.exp(2j * math.pi * k * batch.x / spec.N) * _h_values(g, batch.y)
    power = np.linalg.matrix_power(mode_block(spec, k % spec.N), n_steps)
    exact = np.exp(2j * math.pi * k * x0 / spec.N) * (power @ np.asarray(g, dtype=complex))[_velocity_index(y0)]
    return SemigroupComparison(estimate(samples), complex(exact))


@dataclass(frozen=True)
class BrownianCheck:
    a: float
    n: int
    t: float
    estimate: McEstimate
    limit: float
    finite_rate_exact: complex

    @property
    def gap(self) -> float:
        return abs(self.estimate.value - self.limit)


def brownian_scaling_check(a: float, n: int, t: float, n_paths: int, seed: int, **kw) -> BrownianCheck:
    """Characteristic function of ``X_{a t}`` (started at 0 moving right) against ``e^{-n^2 t/2}``."""
    if a < 10:
        raise DomainError(f"the diffusive check needs a >= 10, got a={a}")
    limit = mode_norm_brownian_limit(n, t).limit
    if t == 0:
        return BrownianCheck(a, n, t, McEstimate(1.0 + 0j, 0.0, n_paths), 1.0, 1.0 + 0j)
    batch = simulate_flat(a, 0.0, 1, a * t, n_paths, seed, **kw)
    est = estimate(np.exp(1j * n * batch.x))
    exact = (_block_exp(a, n, a * t) @ np.ones(2, dtype=complex))[0]
    return BrownianCheck(a, n, t, est, limit, complex(exact))


def equilibrium_chi2(x: np.ndarray, pot: Potential, bins: int = 32) -> tuple[float, float]:
    """Chi-square statistic and p-value of positions against the density ``e^{-V}/(2 pi Z)``."""
    edges = np.linspace(0.0, TWO_PI, bins + 1)
    counts, _ = np.histogram(np.mod(x, TWO_PI), bins=edges)
    z = pot.Z

    def density(u):
        return math.exp(-float(pot(np.array([u]))[0])) / (TWO_PI * z)

    probs = np.array([integrate.quad(density, lo, hi, epsabs=1e-13, epsrel=1e-12)[0]
                      for lo, hi in zip(edges[:-1], edges[1:])])
    probs /= probs.sum()
    res = stats.chisquare(counts, probs * counts.sum())
    return float(res.statistic), float(res.pvalue)


BATCH_COLUMNS = ("path_id", "x_T", "y_T")
EVENT_COLUMNS = ("path_id", "jump_time")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_batch_csv(batch: TrajectoryBatch, out: io.TextIOBase | str | Path, header_comment: str | None = None):
    """Terminal states as ``path_id,x_T,y_T`` with 17 significant digits."""
    own = isinstance(out, (str, Path))
    fh = open(out, "w", newline="") if own else out
    try:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BATCH_COLUMNS)
        xs = batch.x
        for i in range(batch.n_paths):
            xi = xs[i]
            w.writerow((i, str(int(xi)) if batch.model == "chain" else _fmt(xi), int(batch.y[i])))
    finally:
        if own:
            fh.close()


def write_events_csv(batch: TrajectoryBatch, out: io.TextIOBase | str | Path):
    if batch.jump_times is None:
        raise ValueError("batch was simulated without event logs")
    own = isinstance(out, (str, Path))
    fh = open(out, "w", newline="") if own else out
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for i in range(batch.n_paths):
            for t in batch.events(i):
                w.writerow((i, _fmt(t)))
    finally:
        if own:
            fh.close()
