"""Segmentation-guided reconstruction loss and the self-intersection (Xing) penalty."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gradvec.geometry import (
    BOUNDARY_EPS,
    DEFAULT_TOLERANCE,
    ClosedPath,
    band_distance,
    flatten,
    winding_grid,
)
from gradvec.raster import RasterImage
from gradvec.render import VectorScene, render


@dataclass(frozen=True)
class LossConfig:
    alpha_s: float = 0.6
    tau: float = 10.0
    lambda_xing: float = 0.05
    epsilon_seg: float = 0.1
    # "sum" divides the contour ramp by its total, "peak" by its maximum
    udf_normalization: str = "peak"

    def __post_init__(self):
        if self.udf_normalization not in ("sum", "peak"):
            raise ValueError("udf_normalization must be 'sum' or 'peak'")
        if not 0.0 <= self.alpha_s <= 1.0:
            raise ValueError("alpha_s must lie in [0, 1]")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.lambda_xing < 0:
            raise ValueError("lambda_xing must be non-negative")


@dataclass
class LossReport:
    l_sg: float
    l_xing: float
    total: float
    weight_field: np.ndarray


def _window(poly: np.ndarray, pad: float, width: int, height: int):
    lo = poly.min(axis=0) - pad
    hi = poly.max(axis=0) + pad
    x0 = max(0, int(math.floor(lo[0])))
    y0 = max(0, int(math.floor(lo[1])))
    x1 = min(width, int(math.ceil(hi[0])))
    y1 = min(height, int(math.ceil(hi[1])))
    return x0, y0, x1, y1


def udf_raw(paths: Sequence[ClosedPath], width: int, height: int, tau: float,
            tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """``max(0, tau - d)`` with ``d`` the distance to the nearest contour."""
    dist = np.full((height, width), np.inf)
    for path in paths:
        poly = flatten(path, tolerance)
        x0, y0, x1, y1 = _window(poly, tau, width, height)
        if x1 <= x0 or y1 <= y0:
            continue
        bd = band_distance(poly, x0, y0, x1 - x0, y1 - y0, tau)
        np.minimum(dist[y0:y1, x0:x1], bd.dist, out=dist[y0:y1, x0:x1])
    return np.maximum(tau - dist, 0.0)


def udf_weight(paths: Sequence[ClosedPath], canvas: tuple[int, int], tau: float = 10.0,
               tolerance: float = DEFAULT_TOLERANCE, normalize: str = "sum") -> np.ndarray:
    """Contour-proximity weights ``max(0, tau - d)``, normalized.

    ``normalize="sum"`` makes the field sum to 1; ``"peak"`` scales its
    maximum to 1 so it is commensurate with ``alpha_s`` in :func:`sg_weight`.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if len(paths) == 0:
        raise ValueError("udf_weight needs at least one path")
    width, height = canvas
    raw = udf_raw(paths, width, height, tau, tolerance)
    total = raw.sum()
    if total <= 0:
        raise ValueError(f"no pixel lies within tau={tau} of any contour")
    if normalize == "peak":
        return raw / raw.max()
    if normalize != "sum":
        raise ValueError("normalize must be 'sum' or 'peak'")
    return raw / total


def interior_mask(path: ClosedPath, width: int, height: int,
                  tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Pixels whose centers are inside the path (nonzero rule, boundary inclusive)."""
    out = np.zeros((height, width), dtype=bool)
    poly = flatten(path, tolerance)
    x0, y0, x1, y1 = _window(poly, 1.0, width, height)
    if x1 <= x0 or y1 <= y0:
        return out
    w, h = x1 - x0, y1 - y0
    inside = winding_grid(poly, x0, y0, w, h) != 0
    inside |= band_distance(poly, x0, y0, w, h, 1.0).dist <= BOUNDARY_EPS
    out[y0:y1, x0:x1] = inside
    return out


def focused_set(scene: VectorScene, seed_masks: Sequence[np.ndarray],
                tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """Union over paths of (pixels inside the path) ∩ (its seed region)."""
    if len(seed_masks) != len(scene.paths):
        raise ValueError("need exactly one seed mask per path")
    F = np.zeros((scene.height, scene.width), dtype=bool)
    for gp, seed in zip(scene.paths, seed_masks):
        if seed is None or not seed.any():
            continue
        F |= interior_mask(gp.shape, scene.width, scene.height, tolerance) & seed
    return F


def sg_weight(udf: np.ndarray, F: np.ndarray, alpha_s: float = 0.6) -> np.ndarray:
    """``max(d', alpha_s)`` on focused pixels, ``d' * (1 - alpha_s)`` elsewhere."""
    if not 0.0 <= alpha_s <= 1.0:
        raise ValueError("alpha_s must lie in [0, 1]")
    udf = np.asarray(udf, dtype=np.float64)
    return np.where(F, np.maximum(udf, alpha_s), udf * (1.0 - alpha_s))


def sg_loss(target: RasterImage, rendered: RasterImage, w: np.ndarray) -> float:
    """Weighted squared RGB error, summed over pixels and averaged over channels."""
    if target.data.shape != rendered.data.shape or w.shape != (target.height, target.width):
        raise ValueError("target, render and weight field must share the canvas size")
    diff = target.rgb - rendered.rgb
    return float(np.sum(w * np.einsum("ijc,ijc->ij", diff, diff)) / 3.0)


def sg_loss_grad(target: RasterImage, rendered: RasterImage, w: np.ndarray) -> np.ndarray:
    """Derivative of :func:`sg_loss` with respect to the rendered RGB values."""
    return (2.0 / 3.0) * w[..., None] * (rendered.rgb - target.rgb)


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def xing_terms(controls: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment penalty and its gradient w.r.t. (A, B, C, D).

    ``controls`` has shape (n, 4, 2). Segments with a zero-length AB or CD
    contribute 0.
    """
    A, B, C, D = controls[:, 0], controls[:, 1], controls[:, 2], controls[:, 3]
    ab = B - A
    bc = C - B
    cd = D - C
    d1 = _cross(ab, bc) > 0
    nab = np.linalg.norm(ab, axis=1)
    ncd = np.linalg.norm(cd, axis=1)
    ok = (nab > 0) & (ncd > 0)
    denom = np.where(ok, nab * ncd, 1.0)
    d2 = np.where(ok, _cross(ab, cd) / denom, 0.0)
    term = np.where(d1, np.maximum(-d2, 0.0), np.maximum(d2, 0.0))
    # d(term)/d(d2): -1 on the D1 branch when d2 < 0, +1 on the other when d2 > 0
    slope = np.where(d1, -(d2 < 0).astype(float), (d2 > 0).astype(float)) * ok
    safe_ab = np.where(ok, nab, 1.0)[:, None]
    safe_cd = np.where(ok, ncd, 1.0)[:, None]
    dd2_dab = np.stack([cd[:, 1], -cd[:, 0]], axis=1) / denom[:, None] - d2[:, None] * ab / safe_ab**2
    dd2_dcd = np.stack([-ab[:, 1], ab[:, 0]], axis=1) / denom[:, None] - d2[:, None] * cd / safe_cd**2
    grad = np.zeros_like(controls)
    s = slope[:, None]
    grad[:, 0] = -s * dd2_dab
    grad[:, 1] = s * dd2_dab
    grad[:, 2] = -s * dd2_dcd
    grad[:, 3] = s * dd2_dcd
    return term, grad


def xing_loss_and_grad(shapes: Sequence[ClosedPath]) -> tuple[float, list[np.ndarray]]:
    """Mean penalty over all segments, with per-path gradients on ``points``."""
    grads = [np.zeros_like(s.points) for s in shapes]
    n_total = sum(s.num_segments for s in shapes)
    if n_total == 0:
        return 0.0, grads
    total = 0.0
    for shape, g in zip(shapes, grads):
        idx = shape.segment_indices()
        term, tg = xing_terms(shape.points[idx])
        total += float(term.sum())
        np.add.at(g, idx.ravel(), tg.reshape(-1, 2) / n_total)
    return total / n_total, grads


def xing_loss(scene: VectorScene) -> float:
    return xing_loss_and_grad([gp.shape for gp in scene.paths])[0]


def total_loss(target: RasterImage, scene: VectorScene, cfg: LossConfig, F: np.ndarray,
               udf: np.ndarray, rendered: RasterImage | None = None) -> LossReport:
    """Segmentation-guided loss plus ``lambda_xing`` times the Xing penalty."""
    if rendered is None:
        rendered = render(scene)
    w = sg_weight(udf, F, cfg.alpha_s)
    l_sg = sg_loss(target, rendered, w)
    l_xing = xing_loss(scene)
    return LossReport(l_sg, l_xing, l_sg + cfg.lambda_xing * l_xing, w)
