"""Compiled vs numpy kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from psido import _kernels_py

try:
    from psido import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    P = Q = 512
    t = rng.normal(size=(P, 1))
    xi = rng.normal(size=(Q, 1))
    table = rng.normal(size=(P, Q)) + 1j * rng.normal(size=(P, Q))
    coef = rng.normal(size=Q) + 1j * rng.normal(size=Q)
    f = rng.normal(size=4096) + 0j
    th = np.linspace(0, 2 * np.pi, 1 << 16, endpoint=False)
    loop = np.exp(3j * th) * (2 + np.cos(th))
    return {
        "phase_sum 512x512": lambda m: m.phase_sum(t, xi, table, coef),
        "pv_hilbert M=4096": lambda m: m.pv_hilbert(f),
        "unwrap_phase 65536": lambda m: m.unwrap_phase_total(loop),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in cases(rng).items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<22}{py:12.2f}{'n/a':>13}{'':>9}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{py:12.2f}{cy:13.2f}{py / cy:8.1f}x")


if __name__ == "__main__":
    main()
