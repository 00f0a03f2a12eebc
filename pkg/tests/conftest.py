import io

import numpy as np
import pytest

from gradvec.geometry import ClosedPath
from gradvec.raster import RasterImage
from gradvec.render import GradientPath, RadialGradient, VectorScene


def random_scene(rng: np.random.Generator, size: int = 64, n_paths: int = 3, jitter: float = 2.0) -> VectorScene:
    """Perturbed circles with random radial gradients over a random background."""
    paths = []
    lo, hi = 0.25 * size, 0.75 * size
    for _ in range(n_paths):
        c = rng.uniform(lo, hi, 2)
        r = rng.uniform(0.12, 0.3) * size
        shape = ClosedPath.circle(c, r)
        shape.points = shape.points + rng.normal(0.0, jitter, shape.points.shape)
        fill = RadialGradient(c + rng.normal(0, 3, 2), rng.uniform(0.08, 0.4) * size,
                              rng.uniform(0, 1, 4), rng.uniform(0, 1, 4))
        paths.append(GradientPath(shape, fill))
    return VectorScene(size, size, rng.uniform(0, 1, 3), paths)


def rasterize_svg(svg: str, width: int, height: int) -> RasterImage:
    """Render SVG text with cairosvg, an implementation independent of ours."""
    cairosvg = pytest.importorskip("cairosvg")
    from PIL import Image

    png = cairosvg.svg2png(bytestring=svg.encode("utf-8"), output_width=width, output_height=height)
    with Image.open(io.BytesIO(png)) as im:
        arr = np.asarray(im.convert("RGBA"), dtype=np.float64) / 255.0
    return RasterImage(arr)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, printed in the terminal summary so they survive output capture
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def verdict(capsys):
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print(f"\n{line}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
