"""Simultaneous approximation of a common time by integer multiples of periods.

Existence is guaranteed by Minkowski's theorem applied to the lattice spanned
by ``T_i e_i`` and the all-ones vector; the search here is a plain scan over
multiples of the longest period, with the remaining multipliers taken as
nearest integers, so results are deterministic and easy to audit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mode_core import DomainError


class SearchBudgetExhausted(RuntimeError):
    code = "search-budget"

    def __init__(self, budget: int, delta: float):
        super().__init__(f"no simultaneous hit with delta={delta} within {budget} candidates")
        self.budget = budget
        self.delta = delta


@dataclass(frozen=True)
class SimultaneousHit:
    t: float
    multipliers: tuple[int, ...]
    residuals: tuple[float, ...]
    periods: tuple[float, ...]
    candidates_scanned: int


def find_simultaneous_time(
    periods: Sequence[float],
    delta: float,
    t_min: float = 1.0,
    budget: int = 1 << 26,
    first_chunk: int = 1024,
) -> SimultaneousHit:
    """Find ``t >= t_min`` and integers ``k_i`` with ``|k_i T_i - t| < delta`` for all i.

    Candidates ``k T_max`` are scanned in increasing ``k`` in geometrically
    growing chunks; for each, the other multipliers are rounded and ``t`` is
    centred in the spread of the ``k_i T_i``. The first hit in scan order is
    returned, so the answer does not depend on chunk sizes.
    """
    periods = tuple(float(p) for p in periods)
    if not periods or any(not (p > 0) or not math.isfinite(p) for p in periods):
        raise DomainError("periods must be positive and finite")
    if not (delta > 0):
        raise DomainError(f"delta must be positive, got {delta}")
    if t_min < 1:
        raise DomainError(f"t_min must be >= 1, got {t_min}")
    p = np.array(periods)
    anchor = int(np.argmax(p))
    k_start = max(1, math.ceil((t_min - delta) / p[anchor]))
    scanned, chunk = 0, first_chunk
    while scanned < budget:
        size = min(chunk, budget - scanned)
        k = np.arange(k_start + scanned, k_start + scanned + size, dtype=np.int64)
        t0 = k * p[anchor]
        mult = np.rint(t0[:, None] / p[None, :]).astype(np.int64)
        mult[:, anchor] = k
        mult = np.maximum(mult, 1)
        points = mult * p[None, :]
        lo, hi = points.min(axis=1), points.max(axis=1)
        centre = 0.5 * (lo + hi)
        t = np.maximum(centre, t_min)
        resid = np.abs(points - t[:, None])
        ok = np.nonzero(resid.max(axis=1) < delta)[0]
        if ok.size:
            i = int(ok[0])
            return SimultaneousHit(
                t=float(t[i]),
                multipliers=tuple(int(m) for m in mult[i]),
                residuals=tuple(float(r) for r in resid[i]),
                periods=periods,
                candidates_scanned=scanned + i + 1,
            )
        scanned += size
        chunk *= 2
    raise SearchBudgetExhausted(budget, delta)


def envelope_delta(a: float, n: float, eps: float) -> float:
    """Largest ``delta`` such that ``|t - k 2pi/nu_n| <= delta`` forces ``g_n(t) <= 1 + eps``.

    ``g_n = 1 + 2q + 2 sqrt(q(1+q))`` with ``q = (2a/nu_n)^2 sin^2(nu_n t/2)`` is
    increasing in ``q``; inverting at ``1 + eps`` gives ``q* = eps^2/(4(1+eps))``
    and the admissible phase window follows exactly.
    """
    nu = 2.0 * math.sqrt((n - a) * (n + a))
    q_star = eps * eps / (4.0 * (1.0 + eps))
    bound = nu * math.sqrt(q_star) / (2.0 * a)
    if bound >= 1.0:
        return math.pi / nu  # every time qualifies: half a period either side
    return 2.0 * math.asin(bound) / nu


def modes_needing_alignment(a: float, eps: float) -> int:
    """Smallest ``N`` with ``(N + a)/(N - a) <= 1 + eps``; modes ``n >= N`` are automatically fine."""
    return max(1, math.ceil(a * (2.0 + eps) / eps))


@dataclass(frozen=True)
class LiminfWitness:
    a: float
    eps: float
    delta: float
    hit: SimultaneousHit
    modes: tuple[int, ...]


def liminf_witness(a: float, eps: float, t_min: float = 1.0, budget: int = 1 << 26) -> LiminfWitness:
    """A time ``t >= t_min`` at which every oscillatory envelope ``g_n`` is at most ``1 + eps``.

    Only modes below ``modes_needing_alignment`` constrain the search; their
    periods ``2pi/nu_n`` are aligned to within the smallest exact window from
    ``envelope_delta``.
    """
    if not (0 < a < 1):
        raise DomainError(f"liminf witness needs 0 < a < 1, got a={a}")
    if not (eps > 0):
        raise DomainError(f"eps must be positive, got {eps}")
    top = modes_needing_alignment(a, eps)
    modes = tuple(range(1, top))
    if not modes:
        hit = SimultaneousHit(t_min, (), (), (), 0)
        return LiminfWitness(a, eps, math.inf, hit, modes)
    delta = min(envelope_delta(a, n, eps) for n in modes)
    periods = [math.pi / math.sqrt((n - a) * (n + a)) for n in modes]
    hit = find_simultaneous_time(periods, delta, t_min=t_min, budget=budget)
    return LiminfWitness(a, eps, delta, hit, modes)
