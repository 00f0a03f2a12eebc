"""Soft-coverage differentiable rasterizer for radial-gradient filled paths.

Coverage is a smoothstep of the signed distance to the flattened contour over
a 1 px band, and paths are composited back to front with the straight-alpha
over operator onto an opaque background. :func:`render_backward` returns exact
gradients of that piecewise-smooth model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gradvec.geometry import (
    BOUNDARY_EPS,
    DEFAULT_TOLERANCE,
    ClosedPath,
    band_distance,
    distance_to_polyline,
    flatten_weights,
    winding_numbers,
    winding_grid,
)
from gradvec.raster import RasterImage

BAND_WIDTH = 1.0
MIN_RADIUS = 0.5
# Longest polyline edge; keeps the per-edge pixel windows small.
MAX_EDGE = 4.0


@dataclass
class RadialGradient:
    center: np.ndarray
    radius: float
    stop0: np.ndarray
    stop1: np.ndarray

    def __post_init__(self):
        self.center = np.array(self.center, dtype=np.float64).reshape(2)
        self.radius = float(self.radius)
        self.stop0 = np.array(self.stop0, dtype=np.float64).reshape(4)
        self.stop1 = np.array(self.stop1, dtype=np.float64).reshape(4)
        if not self.radius > 0:
            raise ValueError("gradient radius must be positive")

    def copy(self) -> "RadialGradient":
        return RadialGradient(self.center.copy(), self.radius, self.stop0.copy(), self.stop1.copy())


@dataclass
class GradientPath:
    shape: ClosedPath
    fill: RadialGradient
    seed_region: int = -1

    def copy(self) -> "GradientPath":
        return GradientPath(self.shape.copy(), self.fill.copy(), self.seed_region)


@dataclass
class VectorScene:
    """Ordered paths over an opaque background; later paths draw on top."""

    width: int
    height: int
    background: np.ndarray = field(default_factory=lambda: np.ones(3))
    paths: list[GradientPath] = field(default_factory=list)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("canvas must be at least 1×1")
        self.background = np.array(self.background, dtype=np.float64).reshape(3)

    def copy(self) -> "VectorScene":
        return VectorScene(self.width, self.height, self.background.copy(), [p.copy() for p in self.paths])


def eval_gradient(fill: RadialGradient, p) -> np.ndarray:
    """Color of the radial gradient at point(s) ``p``; pads beyond the last stop."""
    p = np.asarray(p, dtype=np.float64)
    rho = np.linalg.norm(p - fill.center, axis=-1)
    t = np.clip(rho / fill.radius, 0.0, 1.0)[..., None]
    return fill.stop0 * (1.0 - t) + fill.stop1 * t


def ramp(sd):
    """Coverage as a function of signed distance (negative inside)."""
    u = np.clip(np.asarray(sd, dtype=np.float64) / BAND_WIDTH + 0.5, 0.0, 1.0)
    return 1.0 - u * u * (3.0 - 2.0 * u)


def coverage(path: ClosedPath, p, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray | float:
    """Anti-aliased coverage of ``path`` at pixel-center point(s) ``p``."""
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    poly = flatten_weights(path, tolerance, MAX_EDGE)[0]
    dist = distance_to_polyline(poly, pts)
    inside = (winding_numbers(poly, pts) != 0) | (dist <= BOUNDARY_EPS)
    cov = ramp(np.where(inside, -dist, dist))
    return float(cov[0]) if single else cov


@dataclass
class _PathTrace:
    x0: int
    y0: int
    poly: np.ndarray
    weights: np.ndarray
    px: np.ndarray
    py: np.ndarray
    dist: np.ndarray
    edge: np.ndarray
    tpar: np.ndarray
    inside: np.ndarray
    u: np.ndarray
    cov: np.ndarray
    rho: np.ndarray
    traw: np.ndarray
    color: np.ndarray
    prev: np.ndarray

    @property
    def window(self):
        h, w = self.cov.shape
        return slice(self.y0, self.y0 + h), slice(self.x0, self.x0 + w)


@dataclass
class RenderTrace:
    """Intermediate values of a forward pass, consumed by the backward pass."""

    width: int
    height: int
    paths: list[_PathTrace | None]


def _trace_path(gp: GradientPath, width: int, height: int, tolerance: float) -> _PathTrace | None:
    poly, weights = flatten_weights(gp.shape, tolerance, MAX_EDGE)
    lo = poly.min(axis=0) - BAND_WIDTH
    hi = poly.max(axis=0) + BAND_WIDTH
    x0 = max(0, int(math.floor(lo[0])))
    y0 = max(0, int(math.floor(lo[1])))
    x1 = min(width, int(math.ceil(hi[0])))
    y1 = min(height, int(math.ceil(hi[1])))
    if x1 <= x0 or y1 <= y0:
        return None
    w, h = x1 - x0, y1 - y0
    bd = band_distance(poly, x0, y0, w, h, BAND_WIDTH)
    inside = (winding_grid(poly, x0, y0, w, h) != 0) | (bd.dist <= BOUNDARY_EPS)
    sd = np.where(inside, -bd.dist, bd.dist)
    u = np.clip(sd / BAND_WIDTH + 0.5, 0.0, 1.0)
    cov = 1.0 - u * u * (3.0 - 2.0 * u)
    px, py = np.meshgrid(np.arange(x0, x1) + 0.5, np.arange(y0, y1) + 0.5)
    fill = gp.fill
    rho = np.hypot(px - fill.center[0], py - fill.center[1])
    traw = rho / fill.radius
    t = np.minimum(traw, 1.0)[..., None]
    color = fill.stop0 * (1.0 - t) + fill.stop1 * t
    return _PathTrace(x0, y0, poly, weights, px, py, bd.dist, bd.edge, bd.t, inside, u, cov,
                      rho, traw, color, np.empty(0))


def forward(scene: VectorScene, tolerance: float = DEFAULT_TOLERANCE) -> tuple[RasterImage, RenderTrace]:
    out = np.empty((scene.height, scene.width, 3))
    out[...] = scene.background
    traces: list[_PathTrace | None] = []
    for gp in scene.paths:
        tr = _trace_path(gp, scene.width, scene.height, tolerance)
        traces.append(tr)
        if tr is None:
            continue
        win = tr.window
        tr.prev = out[win].copy()
        a = (tr.color[..., 3] * tr.cov)[..., None]
        out[win] = a * tr.color[..., :3] + (1.0 - a) * tr.prev
    rgb = np.clip(out, 0.0, 1.0)
    alpha = np.ones(rgb.shape[:2] + (1,))
    return RasterImage(np.concatenate([rgb, alpha], axis=2)), RenderTrace(scene.width, scene.height, traces)


def render(scene: VectorScene, tolerance: float = DEFAULT_TOLERANCE) -> RasterImage:
    """Rasterize the scene to an opaque RGBA image."""
    return forward(scene, tolerance)[0]


def _zero_grads(gp: GradientPath) -> dict:
    return {
        "points": np.zeros_like(gp.shape.points),
        "center": np.zeros(2),
        "radius": 0.0,
        "stop0": np.zeros(4),
        "stop1": np.zeros(4),
    }


def render_backward(scene: VectorScene, loss_grad, trace: RenderTrace | None = None) -> list[dict]:
    """Gradients of ``sum(loss_grad * render(scene).rgb)`` for every path parameter.

    Returns one dict per path with keys ``points`` (3n×2), ``center`` (2),
    ``radius`` (float), ``stop0`` and ``stop1`` (RGBA).
    """
    loss_grad = np.asarray(loss_grad, dtype=np.float64)
    if loss_grad.shape != (scene.height, scene.width, 3):
        raise ValueError(f"loss_grad must have shape {(scene.height, scene.width, 3)}, got {loss_grad.shape}")
    if trace is None:
        trace = forward(scene)[1]
    if len(trace.paths) != len(scene.paths):
        raise ValueError("trace does not belong to this scene")
    G = loss_grad.copy()
    grads: list[dict] = [_zero_grads(gp) for gp in scene.paths]
    for k in range(len(scene.paths) - 1, -1, -1):
        tr = trace.paths[k]
        if tr is None:
            continue
        gp = scene.paths[k]
        fill = gp.fill
        win = tr.window
        Gc = G[win]
        alpha = tr.color[..., 3]
        a = alpha * tr.cov
        da = np.einsum("ijc,ijc->ij", Gc, tr.color[..., :3] - tr.prev)
        dcolor = np.empty(tr.color.shape)
        dcolor[..., :3] = Gc * a[..., None]
        dcolor[..., 3] = da * tr.cov
        G[win] = Gc * (1.0 - a)[..., None]

        t = np.minimum(tr.traw, 1.0)
        g = grads[k]
        g["stop0"] = np.einsum("ijc,ij->c", dcolor, 1.0 - t)
        g["stop1"] = np.einsum("ijc,ij->c", dcolor, t)
        dt = dcolor @ (fill.stop1 - fill.stop0)
        active = (tr.traw < 1.0) & (tr.rho > 0)
        dt = np.where(active, dt, 0.0)
        safe_rho = np.where(tr.rho > 0, tr.rho, 1.0)
        coef = dt / (safe_rho * fill.radius)
        g["center"] = -np.array([np.sum(coef * (tr.px - fill.center[0])),
                                 np.sum(coef * (tr.py - fill.center[1]))])
        g["radius"] = float(-np.sum(dt * tr.traw) / fill.radius)

        dcov = da * alpha
        u = tr.u
        ramp_active = (u > 0.0) & (u < 1.0) & (tr.dist > 0) & (tr.edge >= 0)
        if np.any(ramp_active):
            dsd = dcov[ramp_active] * (-6.0 * u[ramp_active] * (1.0 - u[ramp_active])) / BAND_WIDTH
            sign = np.where(tr.inside[ramp_active], -1.0, 1.0)
            ddist = dsd * sign
            e = tr.edge[ramp_active]
            tp = tr.tpar[ramp_active]
            pa = tr.poly[e]
            pb = tr.poly[e + 1]
            q = pa + tp[:, None] * (pb - pa)
            p = np.stack([tr.px[ramp_active], tr.py[ramp_active]], axis=1)
            normal = (q - p) / tr.dist[ramp_active][:, None]
            contrib = ddist[:, None] * normal
            dpoly = np.zeros_like(tr.poly)
            np.add.at(dpoly, e, contrib * (1.0 - tp)[:, None])
            np.add.at(dpoly, e + 1, contrib * tp[:, None])
            g["points"] = tr.weights.T @ dpoly
    return grads
