"""Grid KDE and marching-squares contour extraction.

Densities are evaluated at cell centers of a fixed grid over model space;
contours are polylines in the same coordinates, stitched into chains and
flagged closed when the ends meet.
"""

from dataclasses import dataclass

import numpy as np

from . import UsageError
from .kernels import kde_grid
from .samplers import default_steps, positions_at_time, sample_trajectories

DEFAULT_GRID = 64
DEFAULT_BOUNDS = (-1.6, 1.6, -1.6, 1.6)
DEFAULT_N_LEVELS = 5
_JOIN_TOL = 1e-9


@dataclass
class GridDensity:
    nx: int
    ny: int
    bounds: tuple  # (xmin, xmax, ymin, ymax)
    values: np.ndarray  # (nx, ny), values[i, j] at (xs[i], ys[j])

    @property
    def cell_size(self):
        xmin, xmax, ymin, ymax = self.bounds
        return (xmax - xmin) / self.nx, (ymax - ymin) / self.ny

    @property
    def xs(self):
        xmin, xmax, _, _ = self.bounds
        w = (xmax - xmin) / self.nx
        return xmin + w * (np.arange(self.nx) + 0.5)

    @property
    def ys(self):
        _, _, ymin, ymax = self.bounds
        w = (ymax - ymin) / self.ny
        return ymin + w * (np.arange(self.ny) + 0.5)


@dataclass
class ContourSet:
    levels: list
    # chains[l] is a list of (vertices (m, 2), closed flag) for levels[l]
    chains: list


def silverman_bandwidth(points) -> float:
    """2D Silverman rule: mean of the axis stds times n^(-1/6)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        raise UsageError("bandwidth needs at least 2 points")
    sx = points[:, 0].std()
    sy = points[:, 1].std()
    return 0.5 * (sx + sy) * len(points) ** (-1.0 / 6.0)


def kde(points, nx=DEFAULT_GRID, ny=DEFAULT_GRID, bounds=DEFAULT_BOUNDS,
        h=None) -> GridDensity:
    """Gaussian KDE evaluated at grid cell centers.

    h defaults to the Silverman bandwidth; it is clamped below by half a
    cell width, which also covers the all-points-identical degeneracy.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise UsageError("KDE needs at least one point")
    if h is None:
        h = silverman_bandwidth(points) if len(points) >= 2 else 0.0
    xmin, xmax, ymin, ymax = bounds
    cell_w = (xmax - xmin) / nx
    h = max(float(h), 0.5 * cell_w)
    xs = xmin + cell_w * (np.arange(nx) + 0.5)
    cell_h = (ymax - ymin) / ny
    ys = ymin + cell_h * (np.arange(ny) + 0.5)
    values = kde_grid(points, xs, ys, h)
    return GridDensity(nx, ny, bounds, values)


def contour_levels(grid: GridDensity, n_levels: int = DEFAULT_N_LEVELS):
    """Quantile levels i/(n_levels+1) of the positive grid values."""
    if n_levels < 1:
        raise UsageError("need n_levels >= 1")
    pos = grid.values[grid.values > 0.0]
    if len(pos) == 0:
        return []
    qs = np.arange(1, n_levels + 1) / (n_levels + 1)
    return [float(v) for v in np.quantile(pos, qs)]


def _interp(p_a, p_b, va, vb, level):
    t = (level - va) / (vb - va)
    return (p_a[0] + t * (p_b[0] - p_a[0]), p_a[1] + t * (p_b[1] - p_a[1]))


def _cell_segments(corners, values, level):
    """Contour segments inside one cell of four grid nodes.

    corners/values are ordered A, B, C, D going around the cell
    (A bottom-left, B bottom-right, C top-right, D top-left).
    """
    inside = [v > level for v in values]
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]  # AB, BC, CD, DA
    crossings = {}
    for e, (a, b) in enumerate(edges):
        if inside[a] != inside[b]:
            crossings[e] = _interp(corners[a], corners[b], values[a], values[b], level)
    if len(crossings) == 2:
        pts = list(crossings.values())
        return [(pts[0], pts[1])]
    if len(crossings) == 4:
        # saddle: pair edges by the cell-center average
        center_inside = (sum(values) / 4.0) > level
        ab, bc, cd, da = (crossings[e] for e in range(4))
        if inside[0]:  # A and C inside
            if center_inside:
                return [(ab, bc), (cd, da)]
            return [(da, ab), (bc, cd)]
        # B and D inside
        if center_inside:
            return [(da, ab), (bc, cd)]
        return [(ab, bc), (cd, da)]
    return []


def _stitch(segments):
    """Join raw segments into chains; a chain is closed when its ends meet."""
    def key(p):
        return (round(p[0] / _JOIN_TOL), round(p[1] / _JOIN_TOL))

    by_end = {}
    for i, (a, b) in enumerate(segments):
        by_end.setdefault(key(a), []).append(i)
        by_end.setdefault(key(b), []).append(i)

    used = [False] * len(segments)
    chains = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        a, b = segments[start]
        chain = [a, b]
        for head in (True, False):
            while True:
                tip = chain[-1] if head else chain[0]
                cand = [i for i in by_end.get(key(tip), []) if not used[i]]
                if not cand:
                    break
                i = cand[0]
                used[i] = True
                sa, sb = segments[i]
                nxt = sb if key(sa) == key(tip) else sa
                if head:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
        closed = (len(chain) > 2
                  and abs(chain[0][0] - chain[-1][0]) <= _JOIN_TOL * 10
                  and abs(chain[0][1] - chain[-1][1]) <= _JOIN_TOL * 10)
        if closed:
            chain = chain[:-1]
        chains.append((np.asarray(chain), closed))
    return chains


def marching_squares(grid: GridDensity, levels) -> ContourSet:
    """Standard marching squares over the cell-center node lattice."""
    xs, ys = grid.xs, grid.ys
    v = grid.values
    out = []
    for level in levels:
        segments = []
        for i in range(grid.nx - 1):
            for j in range(grid.ny - 1):
                vals = (v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1])
                if max(vals) <= level or min(vals) > level:
                    continue
                corners = ((xs[i], ys[j]), (xs[i + 1], ys[j]),
                           (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1]))
                segments.extend(_cell_segments(corners, vals, level))
        out.append(_stitch(segments))
    return ContourSet(list(levels), out)


def shoelace_area(vertices) -> float:
    """Absolute polygon area; used by tests and the contour invariants."""
    v = np.asarray(vertices)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def density_at_time(model, kind, t, n, rng, nx=DEFAULT_GRID, ny=DEFAULT_GRID,
                    bounds=DEFAULT_BOUNDS, steps=None) -> GridDensity:
    """KDE of the sample cloud at UI time t, in model space."""
    if not 0.0 <= t <= 1.0:
        raise UsageError(f"t must be in [0, 1], got {t}")
    steps = steps if steps is not None else default_steps(model, kind)
    trajs = sample_trajectories(model, kind, n, steps, rng, rescale=False)
    pts, _ = positions_at_time(trajs, t)
    return kde(pts, nx, ny, bounds)
