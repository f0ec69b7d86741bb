"""Pure numpy path kernels, vectorised across paths.

Draw ``j`` of path ``p`` is a pure function of ``(seed, p, j)`` (a SplitMix64
stream keyed per path), so these produce the same trajectories as the
compiled kernels and the same results for any partition of the path range.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
PATH_STRIDE = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_key(seed: int, paths: np.ndarray) -> np.ndarray:
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = mix64(np.uint64(seed) + GOLDEN)
        return mix64(base + (paths + np.uint64(1)) * PATH_STRIDE)


def uniform(keys: np.ndarray, j) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = mix64(keys + (np.asarray(j, dtype=np.uint64) + np.uint64(1)) * GOLDEN)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniforms(seed: int, path: int, count: int) -> np.ndarray:
    key = path_key(seed, np.array([path]))
    return uniform(key, np.arange(count, dtype=np.uint64))


def flat_paths(seed: int, path_start: int, n_paths: int, rate: float, horizon: float, y0: int):
    keys = path_key(seed, np.arange(path_start, path_start + n_paths, dtype=np.uint64))
    t = np.zeros(n_paths)
    disp = np.zeros(n_paths)
    vel = np.full(n_paths, y0, dtype=np.int8)
    jumps = np.zeros(n_paths, dtype=np.int64)
    active = np.arange(n_paths)
    j = 0
    while active.size:
        tau = -np.log(uniform(keys[active], j)) / rate
        j += 1
        ta = t[active]
        ya = vel[active].astype(np.float64)
        done = ta + tau >= horizon
        fin = active[done]
        disp[fin] += ya[done] * (horizon - ta[done])
        go = active[~done]
        disp[go] += ya[~done] * tau[~done]
        t[go] = ta[~done] + tau[~done]
        vel[go] = -vel[go]
        jumps[go] += 1
        active = go
    return disp, vel, jumps


def flat_jump_times(seed: int, path_start: int, n_paths: int, rate: float, horizon: float,
                    offsets: np.ndarray) -> np.ndarray:
    keys = path_key(seed, np.arange(path_start, path_start + n_paths, dtype=np.uint64))
    times = np.empty(int(offsets[n_paths]))
    t = np.zeros(n_paths)
    pos = np.asarray(offsets[:n_paths], dtype=np.int64).copy()
    active = np.arange(n_paths)
    j = 0
    while active.size:
        tau = -np.log(uniform(keys[active], j)) / rate
        j += 1
        tn = t[active] + tau
        go = tn < horizon
        active = active[go]
        t[active] = tn[go]
        times[pos[active]] = t[active]
        pos[active] += 1
    return times


def chain_paths(seed: int, path_start: int, n_paths: int, flip_prob: float, n_steps: int,
                modulus: int, x0: int, y0: int):
    keys = path_key(seed, np.arange(path_start, path_start + n_paths, dtype=np.uint64))
    x = np.full(n_paths, x0, dtype=np.int64)
    y = np.full(n_paths, y0, dtype=np.int64)
    flips = np.zeros(n_paths, dtype=np.int64)
    for step in range(n_steps):
        x = (x + y + modulus) % modulus
        flip = uniform(keys, step) < flip_prob
        y[flip] = -y[flip]
        flips += flip
    return x, y.astype(np.int8), flips
