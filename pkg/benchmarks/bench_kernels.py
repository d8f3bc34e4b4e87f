"""Benchmark the numba KDE kernel against the pure-numpy fallback.

Run: python3 benchmarks/bench_kernels.py
The numpy path is always available; the numba path is skipped when the
import fails or DIFFLAB_NUMBA=0.
"""

import time

import numpy as np

from difflab.kernels import HAVE_NUMBA, kde_grid_numba, kde_grid_numpy


def bench(fn, points, xs, ys, h, repeats=5):
    fn(points, xs, ys, h)  # warm up (JIT compile on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(points, xs, ys, h)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'points':>8} {'grid':>8} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for n in (500, 2000, 10000):
        for g in (64, 128):
            points = rng.standard_normal((n, 2))
            xs = np.linspace(-2, 2, g)
            ys = np.linspace(-2, 2, g)
            t_np = bench(kde_grid_numpy, points, xs, ys, 0.2)
            if HAVE_NUMBA:
                t_nb = bench(kde_grid_numba, points, xs, ys, 0.2)
                ref = kde_grid_numpy(points, xs, ys, 0.2)
                fast = kde_grid_numba(points, xs, ys, 0.2)
                assert np.allclose(ref, fast, rtol=1e-10)
                print(f"{n:>8} {g:>5}x{g:<3} {t_np * 1e3:>12.2f} "
                      f"{t_nb * 1e3:>12.2f} {t_np / t_nb:>8.2f}")
            else:
                print(f"{n:>8} {g:>5}x{g:<3} {t_np * 1e3:>12.2f} {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
