"""Builtin 2D point-cloud generators and hand-drawn stroke ingestion.

All datasets live in normalized coordinates (roughly [-1, 1]^2); `bounds`
remembers the original-space square that maps onto [-1, 1]^2 so sampled
trajectories can be reported back in the caller's coordinates.
"""

from dataclasses import dataclass

import numpy as np

from . import UsageError

THREE_DOTS_SIGMA = 0.1
THREE_DOTS_RADIUS = 0.7
THREE_DOTS_ANGLES_DEG = (90.0, 210.0, 330.0)

SMILEY_EYE_SIGMA = 0.06
SMILEY_EYES = ((-0.35, 0.35), (0.35, 0.35))
SMILEY_MOUTH_RADIUS = 0.6
SMILEY_MOUTH_ARC_DEG = (200.0, 340.0)
SMILEY_FACE_RADIUS = 0.95
SMILEY_CURVE_JITTER = 0.03
# mass fractions: eye, eye, mouth arc, face outline
SMILEY_WEIGHTS = (0.15, 0.15, 0.40, 0.30)

DEFAULT_JITTER_SIGMA = 0.02
IDENTITY_BOUNDS = (-1.0, 1.0, -1.0, 1.0)


@dataclass
class Dataset:
    points: np.ndarray  # (n, 2), normalized
    bounds: tuple  # (xmin, xmax, ymin, ymax) in original coordinates
    kind: str  # "smiley" | "three_dots" | "custom"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) == 0:
            raise UsageError("dataset needs a nonempty (n, 2) point array")


@dataclass
class StrokeSet:
    strokes: list  # list of (m_i, 2) float arrays in canvas pixels
    width: float
    height: float

    def __post_init__(self):
        self.strokes = [np.asarray(s, dtype=float).reshape(-1, 2) for s in self.strokes]
        if not self.strokes or any(len(s) == 0 for s in self.strokes):
            raise UsageError("stroke set needs at least one stroke with >= 1 vertex")
        if self.width <= 0 or self.height <= 0:
            raise UsageError("canvas dimensions must be positive")


def three_dots_centers():
    ang = np.deg2rad(THREE_DOTS_ANGLES_DEG)
    return THREE_DOTS_RADIUS * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def gen_three_dots(n: int, seed: int = 0) -> Dataset:
    """Equal mixture of three isotropic Gaussians on a circle.

    Component assignment is exactly stratified (round-robin), so counts
    differ by at most the remainder of n / 3.
    """
    if n < 3:
        raise UsageError(f"need n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    centers = three_dots_centers()
    comp = np.arange(n) % 3
    pts = centers[comp] + THREE_DOTS_SIGMA * rng.standard_normal((n, 2))
    return Dataset(pts, IDENTITY_BOUNDS, "three_dots")


def _arc_points(rng, n, radius, deg_lo, deg_hi, jitter):
    theta = np.deg2rad(rng.uniform(deg_lo, deg_hi, n))
    r = radius + jitter * rng.standard_normal(n)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def gen_smiley(n: int, seed: int = 0) -> Dataset:
    """Two eye blobs, a mouth arc, and the face outline circle."""
    if n < 4:
        raise UsageError(f"need n >= 4, got {n}")
    rng = np.random.default_rng(seed)
    comp = rng.choice(4, size=n, p=SMILEY_WEIGHTS)
    pts = np.empty((n, 2))
    for c in (0, 1):
        mask = comp == c
        pts[mask] = np.array(SMILEY_EYES[c]) + SMILEY_EYE_SIGMA * rng.standard_normal((mask.sum(), 2))
    mouth = comp == 2
    pts[mouth] = _arc_points(rng, mouth.sum(), SMILEY_MOUTH_RADIUS,
                             *SMILEY_MOUTH_ARC_DEG, SMILEY_CURVE_JITTER)
    face = comp == 3
    pts[face] = _arc_points(rng, face.sum(), SMILEY_FACE_RADIUS,
                            0.0, 360.0, SMILEY_CURVE_JITTER)
    return Dataset(pts, IDENTITY_BOUNDS, "smiley")


def stroke_bounds(strokes: StrokeSet):
    """Bounding square of the strokes with a 10% margin, in canvas pixels.

    Aspect ratio is preserved: the square's side is the larger bbox side.
    """
    allpts = np.concatenate(strokes.strokes)
    lo = allpts.min(axis=0)
    hi = allpts.max(axis=0)
    center = (lo + hi) / 2.0
    side = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    if side == 0.0:  # single point or fully degenerate drawing
        side = 1.0
    side *= 1.1
    half = side / 2.0
    return (center[0] - half, center[0] + half, center[1] - half, center[1] + half)


def normalize_points(points, bounds):
    xmin, xmax, ymin, ymax = bounds
    center = np.array([(xmin + xmax) / 2.0, (ymin + ymax) / 2.0])
    half = (xmax - xmin) / 2.0
    return (np.asarray(points, dtype=float) - center) / half


def denormalize_points(points, bounds):
    xmin, xmax, ymin, ymax = bounds
    center = np.array([(xmin + xmax) / 2.0, (ymin + ymax) / 2.0])
    half = (xmax - xmin) / 2.0
    return np.asarray(points, dtype=float) * half + center


def strokes_to_dataset(strokes: StrokeSet, n: int,
                       jitter_sigma: float = DEFAULT_JITTER_SIGMA,
                       seed: int = 0) -> Dataset:
    """Sample n points uniformly by arc length over all strokes.

    Single-vertex strokes act as atoms weighted like one average segment.
    Gaussian jitter (normalized units) thickens the drawn curves.
    """
    if n < 1:
        raise UsageError(f"need n >= 1, got {n}")
    if jitter_sigma < 0:
        raise UsageError("jitter_sigma must be >= 0")
    rng = np.random.default_rng(seed)

    starts, ends, lengths, atoms = [], [], [], []
    for s in strokes.strokes:
        if len(s) == 1:
            atoms.append(s[0])
            continue
        starts.append(s[:-1])
        ends.append(s[1:])
        lengths.append(np.linalg.norm(s[1:] - s[:-1], axis=1))
    if starts:
        starts = np.concatenate(starts)
        ends = np.concatenate(ends)
        lengths = np.concatenate(lengths)
    else:
        starts = np.zeros((0, 2))
        ends = np.zeros((0, 2))
        lengths = np.zeros(0)

    weights = list(lengths)
    atom_w = float(lengths.mean()) if len(lengths) else 1.0
    weights += [atom_w] * len(atoms)
    weights = np.asarray(weights, dtype=float)
    if weights.sum() == 0.0:  # all zero-length segments: treat as atoms
        weights = np.ones_like(weights)
    probs = weights / weights.sum()

    idx = rng.choice(len(probs), size=n, p=probs)
    pts = np.empty((n, 2))
    seg_mask = idx < len(lengths)
    if seg_mask.any():
        i = idx[seg_mask]
        u = rng.uniform(size=(seg_mask.sum(), 1))
        pts[seg_mask] = starts[i] + u * (ends[i] - starts[i])
    if (~seg_mask).any():
        pts[~seg_mask] = np.asarray(atoms)[idx[~seg_mask] - len(lengths)]

    bounds = stroke_bounds(strokes)
    normalized = normalize_points(pts, bounds)
    if jitter_sigma > 0:
        normalized = normalized + jitter_sigma * rng.standard_normal((n, 2))
    return Dataset(normalized, bounds, "custom")


def builtin_dataset(kind: str, n: int, seed: int = 0) -> Dataset:
    if kind == "three_dots":
        return gen_three_dots(n, seed)
    if kind == "smiley":
        return gen_smiley(n, seed)
    raise UsageError(f"unknown builtin dataset {kind!r}")
