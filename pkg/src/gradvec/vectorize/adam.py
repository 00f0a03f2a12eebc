"""Adam with two learning-rate groups over named scene parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gradvec.render import MIN_RADIUS, VectorScene

LR_POINTS = 1.0
LR_FILL = 0.01


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)


def is_geometry(name: str) -> bool:
    return name.rsplit(".", 1)[-1] == "points"


def _clamp(name: str, value: np.ndarray) -> np.ndarray:
    kind = name.rsplit(".", 1)[-1]
    if kind == "radius":
        return np.maximum(value, MIN_RADIUS)
    if kind in ("stop0", "stop1", "color"):
        return np.clip(value, 0.0, 1.0)
    return value


def adam_step(params: dict, grads: dict, state: AdamState,
              lr_points: float = LR_POINTS, lr_fill: float = LR_FILL) -> dict:
    """One Adam update; returns new parameter arrays and advances ``state``.

    Every parameter keeps its own step counter, so parameters that appear
    later start with fresh bias correction. Radii and stop colors are
    clamped back into range after the step.
    """
    for name in params:
        if not np.all(np.isfinite(grads[name])):
            raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
    out = {}
    b1, b2 = state.beta1, state.beta2
    for name, value in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
            state.t[name] = 0
        state.t[name] += 1
        t = state.t[name]
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / (1.0 - b1**t)
        v_hat = state.v[name] / (1.0 - b2**t)
        lr = lr_points if is_geometry(name) else lr_fill
        out[name] = _clamp(name, np.asarray(value, dtype=np.float64) - lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


def scene_params(scene: VectorScene, solid: bool = False) -> dict:
    """Named copies of every optimizable array, ``"<path index>.<field>"``.

    With ``solid`` a path exposes only its points and one RGBA ``color``.
    """
    params = {}
    for k, gp in enumerate(scene.paths):
        params[f"{k}.points"] = gp.shape.points.copy()
        if solid:
            params[f"{k}.color"] = gp.fill.stop0.copy()
        else:
            params[f"{k}.center"] = gp.fill.center.copy()
            params[f"{k}.radius"] = np.array([gp.fill.radius])
            params[f"{k}.stop0"] = gp.fill.stop0.copy()
            params[f"{k}.stop1"] = gp.fill.stop1.copy()
    return params


def scene_grads(path_grads: list[dict], solid: bool = False) -> dict:
    """Flatten per-path gradient dicts into the :func:`scene_params` naming."""
    out = {}
    for k, g in enumerate(path_grads):
        out[f"{k}.points"] = np.asarray(g["points"], dtype=np.float64)
        if solid:
            out[f"{k}.color"] = np.asarray(g["stop0"]) + np.asarray(g["stop1"])
        else:
            out[f"{k}.center"] = np.asarray(g["center"], dtype=np.float64)
            out[f"{k}.radius"] = np.array([g["radius"]], dtype=np.float64)
            out[f"{k}.stop0"] = np.asarray(g["stop0"], dtype=np.float64)
            out[f"{k}.stop1"] = np.asarray(g["stop1"], dtype=np.float64)
    return out


def apply_params(scene: VectorScene, params: dict) -> None:
    """Write named parameters back into the scene in place."""
    for name, value in params.items():
        k_str, kind = name.split(".", 1)
        gp = scene.paths[int(k_str)]
        if kind == "points":
            gp.shape.points = np.array(value, dtype=np.float64)
        elif kind == "center":
            gp.fill.center = np.array(value, dtype=np.float64)
        elif kind == "radius":
            gp.fill.radius = float(np.asarray(value).reshape(-1)[0])
        elif kind == "stop0":
            gp.fill.stop0 = np.array(value, dtype=np.float64)
        elif kind == "stop1":
            gp.fill.stop1 = np.array(value, dtype=np.float64)
        elif kind == "color":
            gp.fill.stop0 = np.array(value, dtype=np.float64)
            gp.fill.stop1 = np.array(value, dtype=np.float64)
        else:
            raise KeyError(f"unknown parameter {name!r}")
