"""Reference implementations used to check production code, written independently of it."""

import numpy as np


def otsu_brute_force(field, bins: int = 256) -> float:
    """Exhaustive Otsu over all ``bins`` candidate thresholds.

    Uses numpy's histogram and the textbook float between-class variance
    ``w0 w1 (mu0 - mu1)^2`` on bin centers. The candidate ``k`` puts bins
    ``0..k`` below the threshold, which is that bin's upper edge.
    """
    v = np.asarray(field, dtype=np.float64).ravel()
    lo, hi = v.min(), v.max()
    hist, edges = np.histogram(v, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    p = hist / hist.sum()
    best, best_k = -1.0, 0
    for k in range(bins):
        w0 = p[: k + 1].sum()
        w1 = 1.0 - w0
        if w0 <= 0 or w1 <= 1e-15:
            score = 0.0
        else:
            mu0 = (p[: k + 1] * centers[: k + 1]).sum() / w0
            mu1 = (p[k + 1:] * centers[k + 1:]).sum() / w1
            score = w0 * w1 * (mu0 - mu1) ** 2
        # strict improvement keeps the lowest threshold on ties
        if score > best * (1 + 1e-12):
            best, best_k = score, k
    return lo + (best_k + 1) * (hi - lo) / bins


def is_dense_partition(labels: np.ndarray, shape) -> bool:
    """Every pixel labeled, labels exactly ``0..R-1``, each label non-empty."""
    if labels.shape != tuple(shape) or labels.dtype.kind not in "iu":
        return False
    if labels.min() < 0:
        return False
    present = np.unique(labels)
    return np.array_equal(present, np.arange(present.size))


def central_difference(f, x0: float, h: float) -> float:
    return (f(x0 + h) - f(x0 - h)) / (2 * h)
