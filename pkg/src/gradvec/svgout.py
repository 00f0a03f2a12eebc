"""SVG serialization of a VectorScene (svg, rect, defs, radialGradient, stop, path)."""

from __future__ import annotations

from os import PathLike

import numpy as np

from gradvec.render import VectorScene

SVG_NS = "http://www.w3.org/2000/svg"


def _num(v: float) -> str:
    s = f"{float(v):.4f}"
    return "0.0000" if s == "-0.0000" else s


def _hex(rgb) -> str:
    c = np.clip(np.round(np.asarray(rgb, dtype=np.float64)[:3] * 255.0), 0, 255).astype(int)
    return "#{:02x}{:02x}{:02x}".format(*c)


def path_data(points: np.ndarray) -> str:
    """``M x0 y0 C ... Z`` with one C command per cubic segment."""
    n = points.shape[0] // 3
    parts = [f"M {_num(points[0, 0])} {_num(points[0, 1])}"]
    for k in range(n):
        b, c, d = points[3 * k + 1], points[3 * k + 2], points[(3 * k + 3) % (3 * n)]
        parts.append(
            f"C {_num(b[0])} {_num(b[1])} {_num(c[0])} {_num(c[1])} {_num(d[0])} {_num(d[1])}"
        )
    parts.append("Z")
    return " ".join(parts)


def to_svg(scene: VectorScene) -> str:
    """Serialize a scene; deterministic, element order follows layer order."""
    w, h = scene.width, scene.height
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{SVG_NS}" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'  <rect x="0" y="0" width="{w}" height="{h}" fill="{_hex(scene.background)}"/>',
    ]
    if scene.paths:
        lines.append("  <defs>")
        for k, gp in enumerate(scene.paths):
            f = gp.fill
            lines.append(
                f'    <radialGradient id="g{k}" gradientUnits="userSpaceOnUse" '
                f'cx="{_num(f.center[0])}" cy="{_num(f.center[1])}" r="{_num(f.radius)}">'
            )
            for offset, stop in (("0%", f.stop0), ("100%", f.stop1)):
                lines.append(
                    f'      <stop offset="{offset}" stop-color="{_hex(stop)}" '
                    f'stop-opacity="{_num(np.clip(stop[3], 0.0, 1.0))}"/>'
                )
            lines.append("    </radialGradient>")
        lines.append("  </defs>")
    for k, gp in enumerate(scene.paths):
        lines.append(
            f'  <path d="{path_data(gp.shape.points)}" fill="url(#g{k})" fill-rule="nonzero"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(scene: VectorScene, path: str | PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_svg(scene))
