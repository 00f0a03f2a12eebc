"""Command-line entry point: ``gradvec in.png [more.png | dir/] --out results/``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from gradvec.raster import RasterImage, load_png, save_png
from gradvec.render import render
from gradvec.svgout import write_svg
from gradvec.vectorize.losses import LossConfig
from gradvec.vectorize.pipeline import EpochRecord, IterationRecord, PipelineError, VectorizeConfig, Vectorizer
from gradvec.vectorize.schedule import parse_schedule

log = logging.getLogger("gradvec")

ENV_PREFIX = "GRADVEC_"
CSV_COLUMNS = ["image", "epoch", "n_paths", "iter", "l_sg", "l_xing", "total", "mse", "psnr"]
SUMMARY_COLUMNS = ["mode", "n_paths", "images", "mean_psnr"]

# (flag, dest, type, default, help); the env var for each is ENV_PREFIX + dest.upper()
_OPTIONS = [
    ("--schedule", "schedule", str, "clamp:cap=32,total=256", "paths per epoch: '1,1,2,4' or 'clamp:cap=32,total=256'"),
    ("--iters", "iters", int, 500, "optimization iterations per epoch"),
    ("--alpha-s", "alpha_s", float, 0.6, "focused-pixel weight floor"),
    ("--tau", "tau", float, 10.0, "contour band width in pixels"),
    ("--lambda-xing", "lambda_xing", float, 0.05, "self-intersection penalty weight"),
    ("--epsilon", "epsilon", float, 0.1, "residual threshold for segmentation"),
    ("--background", "background", str, "ffffff", "canvas color as hex rrggbb"),
    ("--seed", "seed", int, 0, "random seed"),
    ("--out", "out", str, "out", "output directory"),
]
_SWITCHES = [
    ("--no-gradient", "no_gradient", "solid fills instead of radial gradients"),
    ("--no-seg-guidance", "no_seg_guidance", "color-bin init and contour-only loss"),
    ("--snapshots", "snapshots", "write per-epoch SVG/PNG and segmentation dumps"),
]
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[Path, ...]
    out: Path
    schedule: tuple[int, ...]
    vectorize: VectorizeConfig
    seed: int = 0
    snapshots: bool = False
    debug: bool = False

    @property
    def mode(self) -> str:
        return self.vectorize.mode


def parse_color(text: str) -> tuple[float, float, float]:
    s = text.strip().lstrip("#")
    if len(s) != 6:
        raise ConfigError(f"background must be rrggbb hex, got {text!r}")
    try:
        return tuple(int(s[i:i + 2], 16) / 255.0 for i in (0, 2, 4))
    except ValueError:
        raise ConfigError(f"background must be rrggbb hex, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gradvec",
        description="Vectorize raster images into radial-gradient Bézier paths.",
        epilog=f"Every option can also be set via an environment variable {ENV_PREFIX}<NAME>, "
               f"e.g. {ENV_PREFIX}ITERS=200 or {ENV_PREFIX}NO_GRADIENT=1.",
    )
    p.add_argument("inputs", nargs="+", help="PNG files or directories of PNGs")
    for flag, dest, typ, default, text in _OPTIONS:
        p.add_argument(flag, dest=dest, type=typ, default=None, help=f"{text} (default: {default})")
    for flag, dest, text in _SWITCHES:
        p.add_argument(flag, dest=dest, action="store_true", default=None, help=text)
    p.add_argument("--debug", action="store_true", help="debug logging")
    return p


def _apply_env(ns: argparse.Namespace, env) -> None:
    # environment values win over flags
    for _, dest, typ, default, _ in _OPTIONS:
        raw = env.get(ENV_PREFIX + dest.upper())
        if raw is not None:
            try:
                setattr(ns, dest, typ(raw))
            except ValueError:
                raise ConfigError(f"{ENV_PREFIX}{dest.upper()}={raw!r} is not a valid {typ.__name__}") from None
        elif getattr(ns, dest) is None:
            setattr(ns, dest, default)
    for _, dest, _ in _SWITCHES:
        raw = env.get(ENV_PREFIX + dest.upper())
        if raw is not None:
            v = raw.strip().lower()
            if v not in _TRUE | _FALSE:
                raise ConfigError(f"{ENV_PREFIX}{dest.upper()}={raw!r} is not a boolean")
            setattr(ns, dest, v in _TRUE)
        elif getattr(ns, dest) is None:
            setattr(ns, dest, False)


def _collect_inputs(items: Sequence[str]) -> tuple[Path, ...]:
    out: list[Path] = []
    for item in items:
        p = Path(item)
        if p.is_dir():
            found = sorted(q for q in p.iterdir() if q.suffix.lower() == ".png")
            if not found:
                raise ConfigError(f"no .png files in {p}")
            out.extend(found)
        elif p.is_file():
            out.append(p)
        else:
            raise ConfigError(f"input not found: {p}")
    return tuple(out)


def make_config(argv: Sequence[str] | None = None, env=None) -> RunConfig:
    """Parse flags and environment into a validated :class:`RunConfig`."""
    env = os.environ if env is None else env
    ns = build_parser().parse_args(argv)
    _apply_env(ns, env)
    try:
        schedule = tuple(parse_schedule(ns.schedule))
        loss = LossConfig(alpha_s=ns.alpha_s, tau=ns.tau, lambda_xing=ns.lambda_xing, epsilon_seg=ns.epsilon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if ns.iters < 1:
        raise ConfigError("--iters must be >= 1")
    if ns.epsilon < 0:
        raise ConfigError("--epsilon must be non-negative")
    vcfg = VectorizeConfig(
        iterations_per_epoch=ns.iters,
        loss=loss,
        use_gradient=not ns.no_gradient,
        seg_guidance=not ns.no_seg_guidance,
        background=parse_color(ns.background),
    )
    return RunConfig(
        inputs=_collect_inputs(ns.inputs),
        out=Path(ns.out),
        schedule=schedule,
        vectorize=vcfg,
        seed=ns.seed,
        snapshots=ns.snapshots,
        debug=ns.debug,
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _dump_stages(vec: Vectorizer, folder: Path, epoch: int) -> None:
    st = vec.last_segmentation
    if st is None:
        return

    def gray(a):
        a = np.asarray(a, dtype=float)
        span = a.max() - a.min()
        a = (a - a.min()) / span if span > 0 else np.zeros_like(a)
        return RasterImage.from_rgb(np.repeat(a[..., None], 3, axis=2))

    save_png(gray(np.linalg.norm(st.residual, axis=2)), folder / f"epoch{epoch:03d}_residual.png")
    save_png(gray(st.response), folder / f"epoch{epoch:03d}_laplacian.png")
    save_png(gray(st.closed), folder / f"epoch{epoch:03d}_closed.png")
    # region labels as a deterministic pseudo-color
    lab = st.result.labels
    palette = np.random.default_rng(0).random((int(lab.max()) + 1, 3))
    save_png(RasterImage.from_rgb(palette[lab]), folder / f"epoch{epoch:03d}_regions.png")


def run_image(path: Path, cfg: RunConfig) -> list[EpochRecord]:
    """Vectorize one image and write its SVG, PNG and metrics CSV."""
    target = load_png(path)
    stem = f"{path.stem}.{cfg.mode}"
    cfg.out.mkdir(parents=True, exist_ok=True)
    snap_dir = cfg.out / f"{stem}.snapshots"
    rows: list[list[str]] = []

    def on_iteration(rec: IterationRecord):
        rows.append([path.name, str(rec.epoch), str(rec.n_paths), str(rec.iteration), _fmt(rec.l_sg),
                     _fmt(rec.l_xing), _fmt(rec.total), _fmt(rec.mse), _fmt(rec.psnr)])

    def on_epoch(vec: Vectorizer, rec: EpochRecord):
        log.info("%s epoch %d: %d paths, psnr %.3f dB", path.name, rec.epoch, rec.n_paths, rec.psnr)
        if cfg.snapshots:
            snap_dir.mkdir(parents=True, exist_ok=True)
            write_svg(vec.scene, snap_dir / f"epoch{rec.epoch:03d}.svg")
            save_png(render(vec.scene), snap_dir / f"epoch{rec.epoch:03d}.png")
            _dump_stages(vec, snap_dir, rec.epoch)

    vec = Vectorizer(target, cfg.vectorize, on_iteration=on_iteration)
    try:
        vec.run(cfg.schedule, on_epoch=on_epoch)
    finally:
        with open(cfg.out / f"{stem}.metrics.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            w.writerows(rows)
    write_svg(vec.scene, cfg.out / f"{stem}.svg")
    save_png(render(vec.scene), cfg.out / f"{stem}.png")
    return vec.checkpoints


def write_summary(results: dict[str, list[EpochRecord]], mode: str, dest: Path) -> None:
    """Mean PSNR per path-count checkpoint across images."""
    by_count: dict[int, list[float]] = {}
    for records in results.values():
        for rec in records:
            by_count.setdefault(rec.n_paths, []).append(rec.psnr)
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for n in sorted(by_count):
            vals = by_count[n]
            w.writerow([mode, n, len(vals), _fmt(sum(vals) / len(vals))])


def run(cfg: RunConfig) -> int:
    random.seed(cfg.seed)
    np.random.seed(cfg.seed)
    results: dict[str, list[EpochRecord]] = {}
    for path in cfg.inputs:
        try:
            results[path.name] = run_image(path, cfg)
        except PipelineError as exc:
            log.error("%s: pipeline failed at %s", path.name, exc)
            return 1
        except (OSError, ValueError) as exc:
            log.error("%s: %s", path.name, exc)
            return 1
    if len(cfg.inputs) > 1:
        write_summary(results, cfg.mode, cfg.out / f"summary.{cfg.mode}.csv")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = make_config(argv)
    except ConfigError as exc:
        print(f"gradvec: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if cfg.debug else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("mode %s, %d image(s), schedule total %d", cfg.mode, len(cfg.inputs), sum(cfg.schedule))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
