import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from conftest import random_scene, rasterize_svg

from gradvec.geometry import ClosedPath
from gradvec.raster import psnr
from gradvec.render import GradientPath, RadialGradient, VectorScene, render
from gradvec.svgout import SVG_NS, path_data, to_svg, write_svg

NS = {"s": SVG_NS}


def test_empty_scene_only_background():
    root = ET.fromstring(to_svg(VectorScene(10, 6, (1, 0, 0))))
    kids = list(root)
    assert len(kids) == 1 and kids[0].tag == f"{{{SVG_NS}}}rect"
    assert kids[0].get("fill") == "#ff0000"
    assert root.get("viewBox") == "0 0 10 6"


def test_path_data_structure():
    d = path_data(ClosedPath.circle((5, 5), 2).points)
    assert d.count("M") == 1 and d.count("C") == 4 and d.count("Z") == 1
    assert d.startswith("M 7.0000 5.0000 C 7.0000 6.1046")
    assert re.fullmatch(r"M( -?\d+\.\d{4}){2}( C( -?\d+\.\d{4}){6}){4} Z", d)


def test_gradient_elements(rng):
    scene = random_scene(rng, 32)
    root = ET.fromstring(to_svg(scene))
    assert root[0].tag == f"{{{SVG_NS}}}rect"
    grads = root.findall("s:defs/s:radialGradient", NS)
    paths = root.findall("s:path", NS)
    assert len(grads) == len(paths) == 3
    ids = [g.get("id") for g in grads]
    assert len(set(ids)) == 3
    for g, p, gp in zip(grads, paths, scene.paths):
        assert g.get("gradientUnits") == "userSpaceOnUse"
        assert float(g.get("r")) == pytest.approx(gp.fill.radius, abs=5e-5)
        stops = g.findall("s:stop", NS)
        assert [s.get("offset") for s in stops] == ["0%", "100%"]
        assert float(stops[1].get("stop-opacity")) == pytest.approx(gp.fill.stop1[3], abs=5e-5)
        assert p.get("fill") == f"url(#{g.get('id')})"
        assert p.get("fill-rule") == "nonzero"


def test_serialization_deterministic(rng, tmp_path):
    scene = random_scene(rng, 32)
    write_svg(scene, tmp_path / "a.svg")
    write_svg(scene.copy(), tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_no_negative_zero():
    gp = GradientPath(ClosedPath.circle((-0.00001, 3), 2), RadialGradient((-0.00001, 0), 1, (0, 0, 0, 1), (0, 0, 0, 1)))
    assert "-0.0000" not in to_svg(VectorScene(4, 4, (1, 1, 1), [gp]))


def test_independent_renderer_agrees(rng):
    for _ in range(3):
        scene = random_scene(rng, 64)
        theirs = rasterize_svg(to_svg(scene), 64, 64)
        assert psnr(render(scene), theirs) >= 30.0


def test_solid_fill_renders_identically_in_cairo():
    gp = GradientPath(ClosedPath.circle((16, 16), 12), RadialGradient((16, 16), 12, (0.2, 0.4, 0.6, 1), (0.2, 0.4, 0.6, 1)))
    scene = VectorScene(32, 32, (1, 1, 1), [gp])
    theirs = rasterize_svg(to_svg(scene), 32, 32)
    assert np.allclose(theirs.rgb[16, 16], (0.2, 0.4, 0.6), atol=1 / 255)
