"""Gradient-aware segmentation of the residual between target and current render.

Stages: masked residual, Laplacian response summed over channels, Otsu
binarization, 3×3 closing, then a marker-based watershed that splits the
canvas along the detected gradient boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import ndimage
from skimage.morphology import local_maxima, reconstruction
from skimage.segmentation import watershed

from gradvec.raster import RasterImage

LAPLACIAN = np.array([[1.0, 1.0, 1.0], [1.0, -8.0, 1.0], [1.0, 1.0, 1.0]])
OTSU_BINS = 256
SQUARE3 = np.ones((3, 3), dtype=bool)
MARKER_MERGE_RADIUS = 3.0


@dataclass(frozen=True)
class RegionStats:
    label: int
    area: int
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]
    score: float = 0.0

    @property
    def bbox_size(self) -> tuple[int, int]:
        x0, y0, x1, y1 = self.bbox
        return x1 - x0 + 1, y1 - y0 + 1


@dataclass
class SegmentationMap:
    """Dense partition of the canvas: ``labels`` in ``0..R-1`` plus per-region stats."""

    labels: np.ndarray
    regions: list[RegionStats] = field(default_factory=list)

    @property
    def num_regions(self) -> int:
        return len(self.regions)

    def mask(self, label: int) -> np.ndarray:
        return self.labels == label


def _check_same_size(a: RasterImage, b: RasterImage) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"image size mismatch: {a.width}x{a.height} vs {b.width}x{b.height}")


def masked_residual(target: RasterImage, current: RasterImage, epsilon: float = 0.1) -> np.ndarray:
    """``target - current`` on RGB where its l2 norm exceeds ``epsilon``, zero elsewhere."""
    _check_same_size(target, current)
    diff = target.rgb - current.rgb
    keep = np.linalg.norm(diff, axis=2) > epsilon
    return diff * keep[..., None]


def laplacian_response(residual: np.ndarray) -> np.ndarray:
    """Sum over channels of the absolute 3×3 Laplacian cross-correlation (zero padded)."""
    residual = np.asarray(residual, dtype=np.float64)
    if residual.ndim != 3 or residual.shape[0] < 3 or residual.shape[1] < 3:
        raise ValueError("laplacian_response needs an H×W×C field with H, W >= 3")
    out = np.zeros(residual.shape[:2])
    for c in range(residual.shape[2]):
        out += np.abs(ndimage.correlate(residual[..., c], LAPLACIAN, mode="constant", cval=0.0))
    return out


def histogram_bins(field: np.ndarray, bins: int = OTSU_BINS) -> tuple[np.ndarray, float, float]:
    """Bin index of every value over ``bins`` uniform bins spanning ``[min, max]``."""
    lo, hi = float(field.min()), float(field.max())
    if not hi > lo:
        raise ValueError("Otsu threshold is undefined for a constant field")
    idx = np.floor((field - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1), lo, hi


def otsu_threshold(field) -> float:
    """Upper edge of the histogram split that maximizes between-class variance.

    Class 0 holds bins ``0..k``; the returned threshold is edge ``k+1``. Class
    means use bin indices, so the comparison is done in exact integer
    arithmetic and ties resolve to the lowest threshold.
    """
    field = np.asarray(field, dtype=np.float64)
    idx, lo, hi = histogram_bins(field)
    hist = np.bincount(idx.ravel(), minlength=OTSU_BINS).tolist()
    total_n = sum(hist)
    total_s = sum(i * h for i, h in enumerate(hist))
    best_k, best = 0, Fraction(-1)
    n0 = s0 = 0
    for k in range(OTSU_BINS):
        n0 += hist[k]
        s0 += k * hist[k]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            score = Fraction(0)
        else:
            # w0 w1 (mu0 - mu1)^2 up to the constant factor 1 / N^2
            score = Fraction((total_n * s0 - n0 * total_s) ** 2, n0 * n1)
        if score > best:
            best_k, best = k, score
    return lo + (best_k + 1) * (hi - lo) / OTSU_BINS


def close_mask(mask: np.ndarray) -> np.ndarray:
    """Dilation then erosion with a 3×3 square; the canvas border does not erode."""
    dilated = ndimage.binary_dilation(mask, structure=SQUARE3)
    return ndimage.binary_erosion(dilated, structure=SQUARE3, border_value=1)


def binarize_and_close(field: np.ndarray, threshold: float) -> np.ndarray:
    return close_mask(np.asarray(field) > threshold)


def _dense(labels: np.ndarray) -> np.ndarray:
    _, inv = np.unique(labels, return_inverse=True)
    return inv.reshape(labels.shape).astype(np.int64)


def _markers(dist: np.ndarray, edge_mask: np.ndarray) -> np.ndarray:
    # Regional maxima of the h-maxima transform: peaks joined by a saddle less
    # than MARKER_MERGE_RADIUS deep become one plateau, so the ridge of a
    # curved region does not split.
    flat = reconstruction(dist - MARKER_MERGE_RADIUS, dist, method="dilation")
    peaks = local_maxima(flat, connectivity=2, allow_borders=True) & ~edge_mask
    comps, n = ndimage.label(~edge_mask, structure=ndimage.generate_binary_structure(2, 1))
    if n:
        # enclosed regions too thin for an h-maximum still get their top plateau
        seeded = np.zeros(n + 1, dtype=bool)
        seeded[np.unique(comps[peaks])] = True
        comp_max = ndimage.maximum(dist, comps, index=np.arange(n + 1))
        comp_max = np.asarray(comp_max)
        extra = (~seeded[comps]) & (comps > 0) & (dist == comp_max[comps])
        peaks |= extra
    # maxima closer than the merge radius grow into one marker
    grown = ndimage.binary_dilation(peaks, structure=ndimage.generate_binary_structure(2, 1),
                                    iterations=int(MARKER_MERGE_RADIUS // 2))
    groups, _ = ndimage.label(grown, structure=SQUARE3)
    return np.where(peaks, groups, 0)


def watershed_segment(edge_mask: np.ndarray) -> SegmentationMap:
    """Partition the canvas into basins separated by ``edge_mask`` ridges.

    Maxima of the distance transform of non-edge pixels seed a 4-connected
    flood on the negated distance. Maxima closer than 3 px, or separated by
    a saddle less than 3 px deep, share one marker, and every enclosed
    component gets at least one. Edge pixels join whichever
    basin reaches them, so the result covers every pixel. Region statistics
    other than area, bbox and centroid are left at zero.
    """
    edge_mask = np.asarray(edge_mask, dtype=bool)
    if not edge_mask.any() or edge_mask.all():
        labels = np.zeros(edge_mask.shape, dtype=np.int64)
    else:
        dist = ndimage.distance_transform_edt(~edge_mask)
        markers = _markers(dist, edge_mask)
        flooded = watershed(-dist, markers=markers, connectivity=1)
        labels = _dense(flooded)
    return SegmentationMap(labels, region_stats(labels))


def region_stats(labels: np.ndarray, sq_error: np.ndarray | None = None) -> list[RegionStats]:
    """Area, inclusive bbox, pixel-center centroid and summed squared error per label."""
    h, w = labels.shape
    n = int(labels.max()) + 1
    flat = labels.ravel()
    area = np.bincount(flat, minlength=n)
    ys, xs = np.mgrid[0:h, 0:w]
    cx = np.bincount(flat, weights=xs.ravel() + 0.5, minlength=n) / np.maximum(area, 1)
    cy = np.bincount(flat, weights=ys.ravel() + 0.5, minlength=n) / np.maximum(area, 1)
    if sq_error is None:
        score = np.zeros(n)
    else:
        score = np.bincount(flat, weights=sq_error.ravel(), minlength=n)
    slices = ndimage.find_objects(labels + 1)
    out = []
    for k in range(n):
        sy, sx = slices[k]
        out.append(RegionStats(
            label=k,
            area=int(area[k]),
            bbox=(sx.start, sy.start, sx.stop - 1, sy.stop - 1),
            centroid=(float(cx[k]), float(cy[k])),
            score=float(score[k]),
        ))
    return out


def score_regions(seg: SegmentationMap, target: RasterImage, current: RasterImage) -> SegmentationMap:
    """Fill each region's score with its summed squared RGB error."""
    _check_same_size(target, current)
    if seg.labels.shape != (target.height, target.width):
        raise ValueError("segmentation does not match image size")
    diff = target.rgb - current.rgb
    sq = np.einsum("ijc,ijc->ij", diff, diff)
    return replace(seg, regions=region_stats(seg.labels, sq))


@dataclass
class SegmentationStages:
    """Intermediate images of one segmentation pass, kept for debug dumps."""

    residual: np.ndarray
    response: np.ndarray
    threshold: float | None
    binary: np.ndarray
    closed: np.ndarray
    result: SegmentationMap


def segment_residual(target: RasterImage, current: RasterImage, epsilon: float = 0.1) -> SegmentationStages:
    """Run the whole segmentation on the current residual and score the regions.

    When nothing survives the residual mask the result is one region with
    score 0, which callers treat as a converged fit.
    """
    residual = masked_residual(target, current, epsilon)
    h, w = residual.shape[:2]
    if not residual.any():
        labels = np.zeros((h, w), dtype=np.int64)
        blank = np.zeros((h, w), dtype=bool)
        seg = SegmentationMap(labels, region_stats(labels))
        return SegmentationStages(residual, np.zeros((h, w)), None, blank, blank, seg)
    if h < 3 or w < 3:
        response = np.linalg.norm(residual, axis=2)
    else:
        response = laplacian_response(residual)
    if response.max() > response.min():
        threshold = otsu_threshold(response)
        binary = response > threshold
        closed = close_mask(binary)
    else:
        threshold = None
        binary = closed = np.zeros((h, w), dtype=bool)
    seg = score_regions(watershed_segment(closed), target, current)
    return SegmentationStages(residual, response, threshold, binary, closed, seg)


def color_bin_components(target: RasterImage, current: RasterImage, epsilon: float = 0.1,
                         bins: int = 200) -> SegmentationMap:
    """Connected components of pixels with similar color magnitude.

    Pixels whose error exceeds ``epsilon`` are bucketed by the l2 length of
    their target RGB into ``bins`` buckets; each 8-connected run of one
    bucket becomes a region scored by its area. Remaining pixels form a
    single region with score 0.
    """
    _check_same_size(target, current)
    diff = target.rgb - current.rgb
    active = np.linalg.norm(diff, axis=2) > epsilon
    length = np.linalg.norm(target.rgb, axis=2) / np.sqrt(3.0)
    bucket = np.clip(np.floor(length * bins).astype(np.int64), 0, bins - 1)
    labels = np.zeros(active.shape, dtype=np.int64)
    next_label = 1
    for b in np.unique(bucket[active]):
        comp, n = ndimage.label(active & (bucket == b), structure=SQUARE3)
        labels[comp > 0] = comp[comp > 0] + next_label - 1
        next_label += n
    labels = _dense(labels)
    has_rest = not active.all()
    stats = region_stats(labels)
    regions = []
    for r in stats:
        rest = has_rest and r.label == 0
        regions.append(replace(r, score=0.0 if rest else float(r.area)))
    return SegmentationMap(labels, regions)
