"""Time the compiled and numpy path kernels on identical workloads.

    python benchmarks/bench_kernels.py --paths 100000 --repeat 3

Both backends read the same per-path random streams, so the script also
reports how far apart their outputs are.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from volteface import _core


def _best_of(fn, repeat: int) -> tuple[float, tuple]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(paths: int):
    yield "flat a=2 T=3", lambda k: k.flat_paths(11, 0, paths, 2.0, 3.0, 1)
    yield "flat a=50 T=20", lambda k: k.flat_paths(11, 0, paths // 10, 50.0, 20.0, 1)
    yield "chain N=101 200 steps", lambda k: k.chain_paths(11, 0, paths, 0.05, 200, 101, 0, 1)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    py = _core.load_backend("python")
    if not _core.HAVE_COMPILED:
        print("compiled kernels are not built; only the numpy backend is available")
        return 1
    cy = _core.load_backend("cython")

    print(f"{'workload':<24}{'cython s':>10}{'python s':>10}{'speedup':>9}  max |diff|")
    for name, job in workloads(args.paths):
        t_cy, out_cy = _best_of(lambda: job(cy), args.repeat)
        t_py, out_py = _best_of(lambda: job(py), args.repeat)
        diff = max(float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)))) for a, b in zip(out_cy, out_py))
        print(f"{name:<24}{t_cy:>10.4f}{t_py:>10.4f}{t_py / t_cy:>8.1f}x  {diff:.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
