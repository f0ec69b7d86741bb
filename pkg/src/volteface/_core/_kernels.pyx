# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernels. Must stay draw-for-draw identical to ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t PATH_STRIDE = 0xD1B54A32D192ED03ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t path_key(uint64_t seed, uint64_t path) noexcept nogil:
    return mix64(mix64(seed + GOLDEN) + (path + 1) * PATH_STRIDE)


cdef inline double uniform(uint64_t key, uint64_t j) noexcept nogil:
    return (<double>(mix64(key + (j + 1) * GOLDEN) >> 11) + 0.5) * INV_2_53


def uniforms(uint64_t seed, uint64_t path, int64_t count):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef uint64_t key = path_key(seed, path)
    cdef int64_t j
    for j in range(count):
        out[j] = uniform(key, <uint64_t>j)
    return out


def flat_paths(uint64_t seed, int64_t path_start, int64_t n_paths, double rate, double horizon, int y0):
    """Displacement, terminal velocity and jump count of each path."""
    disp_arr = np.empty(n_paths, dtype=np.float64)
    vel_arr = np.empty(n_paths, dtype=np.int8)
    jumps_arr = np.empty(n_paths, dtype=np.int64)
    cdef double[::1] disp = disp_arr
    cdef signed char[::1] vel = vel_arr
    cdef int64_t[::1] jumps = jumps_arr
    cdef int64_t i, count
    cdef uint64_t key, j
    cdef double t, tau, d
    cdef int y
    with nogil:
        for i in range(n_paths):
            key = path_key(seed, <uint64_t>(path_start + i))
            t = 0.0
            d = 0.0
            y = y0
            count = 0
            j = 0
            while True:
                tau = -log(uniform(key, j)) / rate
                j += 1
                if t + tau >= horizon:
                    d += y * (horizon - t)
                    break
                d += y * tau
                t += tau
                y = -y
                count += 1
            disp[i] = d
            vel[i] = <signed char>y
            jumps[i] = count
    return disp_arr, vel_arr, jumps_arr


def flat_jump_times(uint64_t seed, int64_t path_start, int64_t n_paths, double rate, double horizon,
                    cnp.int64_t[::1] offsets):
    """Jump times of each path, concatenated; ``offsets`` comes from the jump counts."""
    times_arr = np.empty(offsets[n_paths], dtype=np.float64)
    cdef double[::1] times = times_arr
    cdef int64_t i, pos
    cdef uint64_t key, j
    cdef double t, tau
    with nogil:
        for i in range(n_paths):
            key = path_key(seed, <uint64_t>(path_start + i))
            t = 0.0
            j = 0
            pos = offsets[i]
            while True:
                tau = -log(uniform(key, j)) / rate
                j += 1
                if t + tau >= horizon:
                    break
                t += tau
                times[pos] = t
                pos += 1
    return times_arr


def chain_paths(uint64_t seed, int64_t path_start, int64_t n_paths, double flip_prob, int64_t n_steps,
                int64_t modulus, int64_t x0, int y0):
    """Terminal position, velocity and flip count of the persistent walk."""
    pos_arr = np.empty(n_paths, dtype=np.int64)
    vel_arr = np.empty(n_paths, dtype=np.int8)
    flips_arr = np.empty(n_paths, dtype=np.int64)
    cdef int64_t[::1] pos = pos_arr
    cdef signed char[::1] vel = vel_arr
    cdef int64_t[::1] flips = flips_arr
    cdef int64_t i, step, x, count
    cdef uint64_t key
    cdef int y
    with nogil:
        for i in range(n_paths):
            key = path_key(seed, <uint64_t>(path_start + i))
            x = x0
            y = y0
            count = 0
            for step in range(n_steps):
                x = (x + y + modulus) % modulus
                if uniform(key, <uint64_t>step) < flip_prob:
                    y = -y
                    count += 1
            pos[i] = x
            vel[i] = <signed char>y
            flips[i] = count
    return pos_arr, vel_arr, flips_arr
