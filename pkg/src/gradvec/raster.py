"""Raster images in straight-alpha RGBA float form, PNG I/O and image metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike

import numpy as np
from PIL import Image

# psnr() of two identical images; compares greater than every finite dB value.
PSNR_INFINITE = math.inf


@dataclass(frozen=True, eq=False)
class RasterImage:
    """H×W×4 float image, channels in [0, 1], straight (non-premultiplied) alpha."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 4:
            raise ValueError(f"expected H×W×4 data, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must be at least 1×1")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("channel values must lie in [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def rgb(self) -> np.ndarray:
        return self.data[..., :3]

    @property
    def alpha(self) -> np.ndarray:
        return self.data[..., 3]

    @classmethod
    def from_rgb(cls, rgb: np.ndarray) -> "RasterImage":
        rgb = np.asarray(rgb, dtype=np.float64)
        alpha = np.ones(rgb.shape[:2] + (1,))
        return cls(np.concatenate([rgb, alpha], axis=2))

    @classmethod
    def filled(cls, width: int, height: int, rgba) -> "RasterImage":
        return cls(np.broadcast_to(np.asarray(rgba, dtype=np.float64), (height, width, 4)).copy())


def load_png(path: str | PathLike) -> RasterImage:
    """Decode an 8- or 16-bit PNG into a RasterImage.

    Missing alpha becomes 1.0. Pixel values are passed through without any
    color-space conversion.
    """
    with Image.open(path) as im:
        im.load()
        if im.format != "PNG":
            raise ValueError(f"{path}: not a PNG file")
        mode = im.mode
        if mode in ("I;16", "I;16B", "I;16L", "I"):
            gray = np.asarray(im, dtype=np.float64) / 65535.0
            gray = np.clip(gray, 0.0, 1.0)
            rgba = np.stack([gray, gray, gray, np.ones_like(gray)], axis=2)
            return RasterImage(rgba)
        if mode != "RGBA":
            im = im.convert("RGBA")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    return RasterImage(arr)


def save_png(img: RasterImage, path: str | PathLike) -> None:
    """Write an 8-bit RGBA PNG."""
    arr = np.round(img.data * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="RGBA").save(path, format="PNG")


def to_uint8(img: RasterImage) -> np.ndarray:
    return np.round(img.data * 255.0).astype(np.uint8)


def composite_over_background(img: RasterImage, bg) -> RasterImage:
    """Flatten straight alpha over an opaque RGB background color."""
    bg = np.asarray(bg, dtype=np.float64)[:3]
    a = img.alpha[..., None]
    rgb = a * img.rgb + (1.0 - a) * bg
    return RasterImage.from_rgb(np.clip(rgb, 0.0, 1.0))


def _check_same_size(a: RasterImage, b: RasterImage) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(
            f"image size mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mse(a: RasterImage, b: RasterImage) -> float:
    """Mean squared error over all pixels and the three color channels."""
    _check_same_size(a, b)
    diff = a.rgb - b.rgb
    return float(np.mean(diff * diff))


def psnr_from_mse(err: float) -> float:
    if err <= 0.0:
        return PSNR_INFINITE
    return 10.0 * math.log10(1.0 / err)


def psnr(a: RasterImage, b: RasterImage) -> float:
    """Peak signal-to-noise ratio in dB with peak value 1.0.

    Identical images give ``PSNR_INFINITE``.
    """
    return psnr_from_mse(mse(a, b))
