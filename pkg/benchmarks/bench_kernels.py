"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R]
"""
import argparse
import timeit

import numpy as np

from heisenspec import _kernels_py

try:
    from heisenspec import _kernels
except ImportError:
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    xi = np.linspace(0.0, 60.0, 200_000)
    yield "mehler_integrand 2e5 nodes", lambda k: k.mehler_integrand(xi, 2, 0.7, 3.0, 0.5)
    xb = np.sort(rng.uniform(0, 40, 2000))
    w = np.full(2000, 0.02)
    a = rng.uniform(-5, 5, 400)
    c = rng.uniform(0, 2, 400)
    yield "mehler_batch 400 pts x 2000 nodes", lambda k: k.mehler_batch(xb, w, 1, 0.3, a, c)
    lam = np.sqrt(np.arange(1, 1_000_001, dtype=float))
    mult = np.ones_like(lam)
    yield "expsum 1e6 terms", lambda k: k.expsum(lam, mult, 0.01)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'case':36s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:36s} {tp:12.2f} {'-':>12s} {'-':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:36s} {tp:12.2f} {tc:12.2f} {tp / tc:8.2f}x")


if __name__ == "__main__":
    main()
