"""Placing new paths on the regions with the largest remaining error."""

from __future__ import annotations

import math

import numpy as np

from gradvec.geometry import ClosedPath
from gradvec.raster import RasterImage
from gradvec.render import GradientPath, RadialGradient
from gradvec.segment import RegionStats, SegmentationMap

DIAMETER_CLIP = (0.2, 1.0)


def select_regions(seg: SegmentationMap, n: int) -> list[RegionStats]:
    """Up to ``n`` regions with positive score, highest score first (ties by label)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = sorted((r for r in seg.regions if r.score > 0), key=lambda r: (-r.score, r.label))
    return ranked[:n]


def gradient_diameter(region: RegionStats, width: int, height: int) -> float:
    """Geometric mean of the bbox sides, clipped to [0.2, 1.0] of the shorter canvas side."""
    bw, bh = region.bbox_size
    short = min(width, height)
    lo, hi = DIAMETER_CLIP
    return float(np.clip(math.sqrt(bw * bh) / short, lo, hi)) * short


def init_path(region: RegionStats, target: RasterImage, canvas: tuple[int, int] | None = None) -> GradientPath:
    """Four-arc circle at the region's centroid, filled with a flat radial gradient.

    Both stops take the target color under the centroid; gradient and
    circle share the same radius.
    """
    if region.area < 1:
        raise ValueError("cannot initialize a path from an empty region")
    width, height = canvas if canvas is not None else (target.width, target.height)
    cx, cy = region.centroid
    px, py = int(math.floor(cx)), int(math.floor(cy))
    if not (0 <= px < width and 0 <= py < height):
        raise RuntimeError(f"region {region.label} centroid {region.centroid} is off the canvas")
    radius = 0.5 * gradient_diameter(region, width, height)
    color = np.append(target.rgb[py, px], 1.0)
    fill = RadialGradient(center=(cx, cy), radius=radius, stop0=color, stop1=color.copy())
    return GradientPath(ClosedPath.circle((cx, cy), radius), fill, seed_region=region.label)
