"""Closed cubic Bézier paths: flattening, winding tests, distance fields, bounding boxes.

Coordinates are continuous pixel units; pixel ``(x, y)`` has its center at
``(x + 0.5, y + 0.5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

DEFAULT_TOLERANCE = 0.1
# Circle approximation constant for four cubic arcs.
KAPPA = 0.55228475
# Points this close to the flattened contour count as inside.
BOUNDARY_EPS = 1e-9


@dataclass(frozen=True)
class CubicSegment:
    A: tuple[float, float]
    B: tuple[float, float]
    C: tuple[float, float]
    D: tuple[float, float]

    def __post_init__(self):
        for name in "ABCD":
            p = getattr(self, name)
            if len(p) != 2 or not all(math.isfinite(float(v)) for v in p):
                raise ValueError(f"control point {name} must be a finite 2D point")

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D], dtype=np.float64)


class ClosedPath:
    """Closed chain of cubic segments stored as a cyclic point array.

    ``points`` has shape ``(3n, 2)``: segment ``k`` uses ``points[3k]``,
    ``points[3k+1]``, ``points[3k+2]`` and ``points[(3k+3) % 3n]``, so the
    end of each segment is the same storage as the start of the next.
    """

    def __init__(self, points):
        pts = np.array(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] % 3 != 0:
            raise ValueError("points must have shape (3n, 2)")
        if pts.shape[0] < 6:
            raise ValueError("a closed path needs at least 2 segments")
        if not np.all(np.isfinite(pts)):
            raise ValueError("control points must be finite")
        self.points = pts

    @classmethod
    def from_segments(cls, segments: Sequence[CubicSegment]) -> "ClosedPath":
        n = len(segments)
        for k, seg in enumerate(segments):
            nxt = segments[(k + 1) % n]
            if tuple(map(float, seg.D)) != tuple(map(float, nxt.A)):
                raise ValueError(f"segment {k} does not end where segment {(k + 1) % n} starts")
        pts = []
        for seg in segments:
            pts.extend([seg.A, seg.B, seg.C])
        return cls(pts)

    @classmethod
    def circle(cls, center, radius: float) -> "ClosedPath":
        """Four-arc cubic approximation of a circle, starting at angle 0, counter-clockwise."""
        cx, cy = float(center[0]), float(center[1])
        r = float(radius)
        k = KAPPA * r
        pts = [
            (cx + r, cy), (cx + r, cy + k), (cx + k, cy + r),
            (cx, cy + r), (cx - k, cy + r), (cx - r, cy + k),
            (cx - r, cy), (cx - r, cy - k), (cx - k, cy - r),
            (cx, cy - r), (cx + k, cy - r), (cx + r, cy - k),
        ]
        return cls(pts)

    @property
    def num_segments(self) -> int:
        return self.points.shape[0] // 3

    def segment_indices(self) -> np.ndarray:
        """(n, 4) indices into ``points`` of each segment's A, B, C, D."""
        n = self.num_segments
        base = 3 * np.arange(n)
        return np.stack([base, base + 1, base + 2, (base + 3) % (3 * n)], axis=1)

    def controls(self) -> np.ndarray:
        """(n, 4, 2) control points of every segment."""
        return self.points[self.segment_indices()]

    @property
    def segments(self) -> list[CubicSegment]:
        return [CubicSegment(*(tuple(p) for p in c)) for c in self.controls()]

    def copy(self) -> "ClosedPath":
        return ClosedPath(self.points.copy())

    def __repr__(self):
        return f"ClosedPath(segments={self.num_segments})"


def _bernstein(t: np.ndarray) -> np.ndarray:
    s = 1.0 - t
    return np.stack([s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t], axis=-1)


def _subdivisions(ctrl: np.ndarray, tolerance: float, max_edge: float | None) -> int:
    # Uniform chords deviate from a cubic by at most 0.75 * L / n^2 where L is
    # the largest second difference of the control polygon.
    a, b, c, d = ctrl
    second = max(np.linalg.norm(a - 2 * b + c), np.linalg.norm(b - 2 * c + d))
    need = math.sqrt(0.75 * second / tolerance) if second > 0 else 1.0
    if max_edge is not None:
        hull = np.linalg.norm(np.diff(ctrl, axis=0), axis=1).sum()
        need = max(need, hull / max_edge)
    # powers of two so refining the tolerance only ever nests more vertices
    return 1 << max(0, math.ceil(math.log2(max(need, 1.0))))


def flatten_weights(
    path: ClosedPath, tolerance: float = DEFAULT_TOLERANCE, max_edge: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Flatten and return ``(polyline, W)`` with ``polyline == W @ path.points``.

    The polyline is closed (last vertex repeats the first). ``W`` holds the
    Bernstein weights, so gradients on polyline vertices pull back to control
    points as ``W.T @ grad``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    idx = path.segment_indices()
    ctrls = path.points[idx]
    m = path.points.shape[0]
    counts = [_subdivisions(c, tolerance, max_edge) for c in ctrls]
    total = sum(counts)
    W = np.zeros((total + 1, m))
    row = 0
    for k, n in enumerate(counts):
        t = np.arange(n) / n
        W[row:row + n][:, idx[k]] += _bernstein(t)
        row += n
    W[total, 0] = 1.0
    return W @ path.points, W


def flatten(path: ClosedPath, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Closed polyline within ``tolerance`` of the true curve, shape (M, 2)."""
    return flatten_weights(path, tolerance)[0]


def _segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray):
    ab = b - a
    denom = np.einsum("...i,...i->...", ab, ab)
    num = np.einsum("...i,...i->...", p - a, ab)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    q = a + t[..., None] * ab
    diff = p - q
    return np.sqrt(np.einsum("...i,...i->...", diff, diff)), t


def distance_to_polyline(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Unsigned distance from each point to a polyline (brute force over edges)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a, b = poly[:-1], poly[1:]
    out = np.full(len(pts), np.inf)
    for start in range(0, len(pts), 4096):
        p = pts[start:start + 4096, None, :]
        d, _ = _segment_distance(p, a[None], b[None])
        out[start:start + 4096] = d.min(axis=1)
    return out


def winding_numbers(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Winding number of a closed polyline around each point (horizontal ray to +x)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a, b = poly[:-1], poly[1:]
    out = np.zeros(len(pts), dtype=np.int64)
    for start in range(0, len(pts), 4096):
        px = pts[start:start + 4096, 0:1]
        py = pts[start:start + 4096, 1:2]
        up = (a[None, :, 1] <= py) & (b[None, :, 1] > py)
        down = (b[None, :, 1] <= py) & (a[None, :, 1] > py)
        dy = b[:, 1] - a[:, 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            xc = a[None, :, 0] + (py - a[None, :, 1]) * (b[:, 0] - a[:, 0]) / np.where(dy != 0, dy, 1.0)
        right = xc > px
        out[start:start + 4096] = (up & right).sum(axis=1) - (down & right).sum(axis=1)
    return out


def point_in_path(path: ClosedPath, p, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """Nonzero-winding containment on the flattened contour; boundary points are inside."""
    poly = flatten(path, tolerance)
    pt = np.asarray(p, dtype=np.float64).reshape(1, 2)
    if distance_to_polyline(poly, pt)[0] <= BOUNDARY_EPS:
        return True
    return bool(winding_numbers(poly, pt)[0] != 0)


def winding_grid(poly: np.ndarray, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    """Winding numbers at the pixel centers of the window ``[x0, x0+w) × [y0, y0+h)``.

    Scanline form of :func:`winding_numbers`; both use the half-open rule
    ``min(y) <= yc < max(y)`` so vertices are never double counted.
    """
    acc = np.zeros((h, w + 2), dtype=np.int64)
    a, b = poly[:-1], poly[1:]
    dy = b[:, 1] - a[:, 1]
    keep = dy != 0
    a, b, dy = a[keep], b[keep], dy[keep]
    if len(a) == 0 or h == 0:
        return np.zeros((h, w), dtype=np.int64)
    direction = np.where(dy > 0, 1, -1)
    ylo = np.minimum(a[:, 1], b[:, 1])
    yhi = np.maximum(a[:, 1], b[:, 1])
    r0 = np.clip(np.ceil(ylo - y0 - 0.5), 0, h).astype(np.int64)
    r1 = np.clip(np.ceil(yhi - y0 - 0.5), 0, h).astype(np.int64)
    counts = np.maximum(r1 - r0, 0)
    total = int(counts.sum())
    if total == 0:
        return np.zeros((h, w), dtype=np.int64)
    e = np.repeat(np.arange(len(a)), counts)
    rows = r0[e] + (np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts))
    yc = y0 + rows + 0.5
    xc = a[e, 0] + (yc - a[e, 1]) * (b[e, 0] - a[e, 0]) / dy[e]
    # the crossing is to the right of pixel centers j < xc - x0 - 0.5
    m = np.clip(np.ceil(xc - x0 - 0.5), 0, w).astype(np.int64)
    np.add.at(acc, (rows, m), direction[e])
    right = np.cumsum(acc[:, ::-1], axis=1)[:, ::-1]
    return right[:, 1:w + 1]


@dataclass
class BandDistance:
    """Per-pixel nearest-edge data for one polyline over a pixel window.

    ``dist`` is exact wherever the true distance is at most ``radius``;
    elsewhere it is an upper bound (``inf`` when no edge is that close).
    """

    x0: int
    y0: int
    dist: np.ndarray
    edge: np.ndarray
    t: np.ndarray
    radius: float


def band_distance(poly: np.ndarray, x0: int, y0: int, w: int, h: int, radius: float) -> BandDistance:
    """Distances from pixel centers to the polyline, exact within ``radius``.

    Each edge only visits pixels in its own bounding box inflated by
    ``radius``, which keeps the cost proportional to the band area.
    """
    dist = np.full(h * w, np.inf)
    edge = np.full(h * w, -1, dtype=np.int64)
    tpar = np.zeros(h * w)
    a, b = poly[:-1], poly[1:]
    if len(a) == 0 or w <= 0 or h <= 0:
        return BandDistance(x0, y0, dist.reshape(h, w), edge.reshape(h, w), tpar.reshape(h, w), radius)
    lo = np.minimum(a, b) - radius
    hi = np.maximum(a, b) + radius
    ix0 = np.clip(np.ceil(lo[:, 0] - 0.5) - x0, 0, w).astype(np.int64)
    ix1 = np.clip(np.floor(hi[:, 0] - 0.5) - x0 + 1, 0, w).astype(np.int64)
    iy0 = np.clip(np.ceil(lo[:, 1] - 0.5) - y0, 0, h).astype(np.int64)
    iy1 = np.clip(np.floor(hi[:, 1] - 0.5) - y0 + 1, 0, h).astype(np.int64)
    wx = np.maximum(ix1 - ix0, 0)
    wy = np.maximum(iy1 - iy0, 0)
    counts = wx * wy
    total = int(counts.sum())
    if total == 0:
        return BandDistance(x0, y0, dist.reshape(h, w), edge.reshape(h, w), tpar.reshape(h, w), radius)
    e = np.repeat(np.arange(len(a)), counts)
    off = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    wxe = wx[e]
    ix = ix0[e] + off % wxe
    iy = iy0[e] + off // wxe
    p = np.stack([x0 + ix + 0.5, y0 + iy + 0.5], axis=1)
    d, t = _segment_distance(p, a[e], b[e])
    pix = iy * w + ix
    order = np.lexsort((d, pix))
    sp = pix[order]
    first = np.ones(len(sp), dtype=bool)
    first[1:] = sp[1:] != sp[:-1]
    sel = order[first]
    dist[pix[sel]] = d[sel]
    edge[pix[sel]] = e[sel]
    tpar[pix[sel]] = t[sel]
    return BandDistance(x0, y0, dist.reshape(h, w), edge.reshape(h, w), tpar.reshape(h, w), radius)


def contour_distance_field(
    paths: Sequence[ClosedPath],
    width: int,
    height: int,
    tolerance: float = DEFAULT_TOLERANCE,
    band: float | None = None,
) -> np.ndarray:
    """Unsigned distance from every pixel center to the nearest flattened contour.

    With ``band=None`` the field is exact everywhere. With a band it is exact
    within ``band`` pixels of a contour and an upper bound elsewhere.
    """
    if len(paths) == 0:
        raise ValueError("contour_distance_field needs at least one path")
    if width < 1 or height < 1:
        raise ValueError("canvas must be at least 1×1")
    radius = band if band is not None else math.hypot(width, height) + 1.0
    polys = [flatten(p, tolerance) for p in paths]
    field = np.full((height, width), np.inf)
    for poly in polys:
        np.minimum(field, band_distance(poly, 0, 0, width, height, radius).dist, out=field)
    missing = ~np.isfinite(field)
    if missing.all():
        # no contour within the band anywhere on the canvas
        for poly in polys:
            far = band_distance(poly, 0, 0, width, height, math.hypot(width, height) + 1.0)
            np.minimum(field, far.dist, out=field)
    elif missing.any():
        # triangle inequality through the nearest exact pixel gives an upper bound
        hop, (iy, ix) = ndimage.distance_transform_edt(missing, return_indices=True)
        field[missing] = hop[missing] + field[iy[missing], ix[missing]]
    return field


def bbox(mask) -> tuple[int, int, int, int]:
    """Tight inclusive bounds ``(x_min, y_min, x_max, y_max)`` of a pixel set.

    Accepts a boolean H×W array or an iterable of ``(x, y)`` pixels.
    """
    if isinstance(mask, np.ndarray) and mask.ndim == 2:
        ys, xs = np.nonzero(mask)
    else:
        pix = np.array(list(mask), dtype=np.int64).reshape(-1, 2)
        xs, ys = pix[:, 0], pix[:, 1]
    if len(xs) == 0:
        raise ValueError("bbox of an empty pixel set")
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def polyline_bounds(polys: Iterable[np.ndarray]) -> tuple[float, float, float, float]:
    stacked = np.concatenate(list(polys), axis=0)
    lo = stacked.min(axis=0)
    hi = stacked.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])
