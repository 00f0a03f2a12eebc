"""Layer-wise raster-to-vector conversion with radial-gradient filled Bézier paths."""

from gradvec.raster import RasterImage, load_png, save_png, mse, psnr
from gradvec.geometry import ClosedPath, CubicSegment
from gradvec.render import GradientPath, RadialGradient, VectorScene, render
from gradvec.svgout import to_svg

__all__ = [
    "ClosedPath",
    "CubicSegment",
    "GradientPath",
    "RadialGradient",
    "RasterImage",
    "VectorScene",
    "load_png",
    "mse",
    "psnr",
    "render",
    "save_png",
    "to_svg",
]

__version__ = "0.1.0"
