"""KDE grid kernel: pure-numpy default with an opt-in numba path.

The Gaussian grid kernel factorizes along the axes, which turns the
numpy path into two vectorized exp tables and one BLAS matmul; on this
workload that beats the jitted loop version (see
benchmarks/bench_kernels.py), so numpy is the default. Set
DIFFLAB_NUMBA=1 to select the numba kernel instead; both paths compute
the same quantity up to floating-point summation order.
"""

import os

import numpy as np


def numba_requested() -> bool:
    return os.environ.get("DIFFLAB_NUMBA", "0").lower() in ("1", "true", "on")


try:
    import numba
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def kde_grid_numpy(points, xs, ys, h):
    """Gaussian KDE on a rectangular grid, evaluated at (xs x ys) centers."""
    points = np.asarray(points, dtype=float)
    inv2h2 = 1.0 / (2.0 * h * h)
    ex = np.exp(-((xs[:, None] - points[None, :, 0]) ** 2) * inv2h2)  # (nx, n)
    ey = np.exp(-((ys[:, None] - points[None, :, 1]) ** 2) * inv2h2)  # (ny, n)
    values = ex @ ey.T
    return values / (len(points) * 2.0 * np.pi * h * h)


if HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _kde_grid_jit(points, xs, ys, h):  # pragma: no cover - compiled
        n = points.shape[0]
        nx = xs.shape[0]
        ny = ys.shape[0]
        inv2h2 = 1.0 / (2.0 * h * h)
        ex = np.empty((nx, n))
        ey = np.empty((n, ny))
        for p in numba.prange(n):
            px = points[p, 0]
            py = points[p, 1]
            for i in range(nx):
                ex[i, p] = np.exp(-((xs[i] - px) ** 2) * inv2h2)
            for j in range(ny):
                ey[p, j] = np.exp(-((ys[j] - py) ** 2) * inv2h2)
        out = np.zeros((nx, ny))
        for i in numba.prange(nx):
            for p in range(n):
                e = ex[i, p]
                for j in range(ny):
                    out[i, j] += e * ey[p, j]
        return out / (n * 2.0 * np.pi * h * h)

    def kde_grid_numba(points, xs, ys, h):
        return _kde_grid_jit(np.ascontiguousarray(points, dtype=np.float64),
                             np.ascontiguousarray(xs, dtype=np.float64),
                             np.ascontiguousarray(ys, dtype=np.float64),
                             float(h))

else:
    kde_grid_numba = None

USE_NUMBA = HAVE_NUMBA and numba_requested()
kde_grid = kde_grid_numba if USE_NUMBA else kde_grid_numpy
