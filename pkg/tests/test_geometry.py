import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradvec.geometry import (
    ClosedPath,
    CubicSegment,
    band_distance,
    bbox,
    contour_distance_field,
    flatten,
    flatten_weights,
    point_in_path,
    winding_grid,
)


def square(x0, y0, x1, y1):
    # straight cubic edges with evenly spaced controls
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    pts = []
    for k in range(4):
        a, d = np.array(corners[k], float), np.array(corners[(k + 1) % 4], float)
        pts += [a, a + (d - a) / 3, a + 2 * (d - a) / 3]
    return ClosedPath(pts)


def bezier(ctrl, t):
    t = np.asarray(t)[:, None]
    s = 1 - t
    return s**3 * ctrl[0] + 3 * s * s * t * ctrl[1] + 3 * s * t * t * ctrl[2] + t**3 * ctrl[3]


def ray_cast_inside(poly, p):
    # even-odd crossing count; agrees with nonzero for simple polygons
    inside = False
    for a, b in zip(poly[:-1], poly[1:]):
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x > p[0]:
                inside = not inside
    return inside


def brute_distance(poly, p):
    best = np.inf
    for a, b in zip(poly[:-1], poly[1:]):
        ab = b - a
        t = 0.0 if not ab.any() else np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0, 1)
        best = min(best, float(np.linalg.norm(p - (a + t * ab))))
    return best


def test_closed_path_validation():
    with pytest.raises(ValueError):
        ClosedPath(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        ClosedPath(np.zeros((7, 2)))
    with pytest.raises(ValueError):
        ClosedPath([(0, 0), (1, 0), (2, 0), (np.nan, 1), (0, 1), (0, 0)])


def test_from_segments_requires_closure():
    a = CubicSegment((0, 0), (1, 0), (2, 0), (3, 0))
    b = CubicSegment((3, 0), (2, 1), (1, 1), (0, 0))
    path = ClosedPath.from_segments([a, b])
    assert path.num_segments == 2
    assert np.allclose(path.controls()[1, 3], (0, 0))
    with pytest.raises(ValueError):
        ClosedPath.from_segments([a, CubicSegment((3, 1), (2, 1), (1, 1), (0, 0))])


def test_degenerate_segment_collapses():
    path = ClosedPath([(2, 2)] * 6)
    poly = flatten(path)
    assert np.allclose(poly, 2.0)
    assert np.array_equal(poly[0], poly[-1])


def test_straight_segments_need_one_edge():
    poly = flatten(square(0, 0, 10, 10), tolerance=1e-6)
    # 4 edges plus the closing repeat of the first vertex
    assert len(poly) == 5
    assert np.array_equal(poly[0], poly[-1])


def test_circle_flattening_within_tolerance():
    poly = flatten(ClosedPath.circle((0, 0), 1.0), tolerance=0.01)
    r = np.linalg.norm(poly, axis=1)
    # the 4-arc cubic itself deviates from the circle by about 2.7e-4
    assert np.all(np.abs(r - 1.0) <= 0.01 + 3e-4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=24, max_size=24), st.sampled_from([0.5, 0.1, 0.02]))
def test_flatten_error_below_tolerance(coords, tol):
    path = ClosedPath(np.array(coords).reshape(12, 2))
    poly, W = flatten_weights(path, tol)
    assert np.allclose(W @ path.points, poly)
    dense = np.concatenate([bezier(c, np.linspace(0, 1, 257)) for c in path.controls()])
    # every curve sample lies within tol of the polyline
    worst = max(brute_distance(poly, p) for p in dense[::16])
    assert worst <= tol + 1e-9


def test_halving_tolerance_reduces_error():
    path = ClosedPath.circle((0, 0), 50.0)
    errs = []
    for tol in (1.0, 0.5, 0.25, 0.125):
        r = np.linalg.norm(flatten(path, tol), axis=1)
        mid = flatten(path, tol)
        mids = 0.5 * (mid[:-1] + mid[1:])
        errs.append(np.max(np.abs(np.linalg.norm(mids, axis=1) - 50.0)))
        assert np.all(np.abs(r - 50.0) < 0.02)
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_point_in_path_examples():
    c = ClosedPath.circle((10, 10), 4)
    assert point_in_path(c, (10, 10))
    assert not point_in_path(c, (18, 10))
    sq = square(10, 10, 20, 20)
    assert point_in_path(sq, (10, 15))
    assert point_in_path(sq, (15, 20))


def test_point_in_path_matches_ray_cast(rng):
    path = ClosedPath.circle((32, 32), 20)
    path.points = path.points + rng.normal(0, 3, path.points.shape)
    poly = flatten(path)
    pts = rng.uniform(0, 64, (1000, 2))
    ours = np.array([point_in_path(path, p) for p in pts])
    theirs = np.array([ray_cast_inside(poly, p) for p in pts])
    assert np.array_equal(ours, theirs)


def test_winding_grid_matches_brute(rng):
    path = ClosedPath.circle((16, 14), 9)
    path.points = path.points + rng.normal(0, 1.5, path.points.shape)
    poly = flatten(path)
    grid = winding_grid(poly, 2, 1, 28, 26)
    for y in range(26):
        for x in range(28):
            assert (grid[y, x] != 0) == ray_cast_inside(poly, (x + 2.5, y + 1.5))


def test_distance_field_examples():
    sq = square(10, 10, 20, 20)
    field = contour_distance_field([sq], 30, 30)
    assert field[15, 5] == pytest.approx(4.5, abs=1e-12)
    # pixel center (10.5, 15.5) sits half a pixel from the left edge
    assert field[15, 10] == pytest.approx(0.5, abs=1e-12)
    on = contour_distance_field([square(10.5, 10.5, 19.5, 19.5)], 30, 30)
    assert on[15, 10] == pytest.approx(0.0, abs=1e-9)


def test_distance_field_is_min_over_paths():
    a = ClosedPath.circle((12, 12), 6)
    b = ClosedPath.circle((40, 30), 8)
    both = contour_distance_field([a, b], 56, 44)
    sep = np.minimum(contour_distance_field([a], 56, 44), contour_distance_field([b], 56, 44))
    assert np.allclose(both, sep)


def test_distance_field_matches_brute_force(rng):
    path = ClosedPath.circle((20, 18), 10)
    path.points = path.points + rng.normal(0, 2, path.points.shape)
    poly = flatten(path)
    field = contour_distance_field([path], 40, 36)
    for _ in range(200):
        x, y = rng.integers(0, 40), rng.integers(0, 36)
        assert field[y, x] == pytest.approx(brute_distance(poly, np.array([x + 0.5, y + 0.5])), abs=1e-9)


def test_banded_field_exact_inside_band_upper_bound_outside():
    path = ClosedPath.circle((30, 30), 12)
    exact = contour_distance_field([path], 64, 64)
    banded = contour_distance_field([path], 64, 64, band=3.0)
    near = exact <= 3.0
    assert np.allclose(banded[near], exact[near])
    assert np.all(banded >= exact - 1e-9)


def test_band_distance_window_offset():
    poly = flatten(ClosedPath.circle((10, 10), 5))
    full = band_distance(poly, 0, 0, 20, 20, 3.0)
    part = band_distance(poly, 4, 6, 10, 8, 3.0)
    assert np.array_equal(part.dist, full.dist[6:14, 4:14])


def test_contour_field_empty_raises():
    with pytest.raises(ValueError):
        contour_distance_field([], 4, 4)


def test_bbox_examples():
    assert bbox([(3, 7)]) == (3, 7, 3, 7)
    assert bbox([(0, 0), (4, 2)]) == (0, 0, 4, 2)
    m = np.zeros((30, 30), bool)
    m[0:20, 0:10] = True
    x0, y0, x1, y1 = bbox(m)
    assert (x1 - x0 + 1, y1 - y0 + 1) == (10, 20)
    with pytest.raises(ValueError):
        bbox(np.zeros((3, 3), bool))
