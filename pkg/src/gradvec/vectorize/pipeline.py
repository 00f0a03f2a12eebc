"""Progressive vectorization loop: segment the residual, add paths, optimize all paths."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from gradvec.raster import RasterImage, composite_over_background, mse, psnr_from_mse
from gradvec.render import VectorScene, forward, render, render_backward
from gradvec.segment import SegmentationStages, color_bin_components, segment_residual
from gradvec.vectorize.adam import LR_FILL, LR_POINTS, AdamState, adam_step, apply_params, scene_grads, scene_params
from gradvec.vectorize.initialize import init_path, select_regions
from gradvec.vectorize.losses import (
    LossConfig,
    focused_set,
    sg_loss_grad,
    sg_weight,
    udf_weight,
    xing_loss_and_grad,
)

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """Optimization failure, tagged with where it happened."""

    def __init__(self, message: str, epoch: int, iteration: int | None = None):
        where = f"epoch {epoch}" + (f", iteration {iteration}" if iteration is not None else "")
        super().__init__(f"{where}: {message}")
        self.epoch = epoch
        self.iteration = iteration


@dataclass(frozen=True)
class VectorizeConfig:
    iterations_per_epoch: int = 500
    loss: LossConfig = field(default_factory=LossConfig)
    use_gradient: bool = True
    seg_guidance: bool = True
    lr_points: float = LR_POINTS
    lr_fill: float = LR_FILL
    # iterations between recomputing path interiors for the focused set
    coverage_refresh: int = 10
    background: tuple[float, float, float] = (1.0, 1.0, 1.0)
    color_bins: int = 200

    @property
    def mode(self) -> str:
        if self.use_gradient and self.seg_guidance:
            return "full"
        if not self.use_gradient and not self.seg_guidance:
            return "live-baseline"
        return "no-gradient" if not self.use_gradient else "no-seg-guidance"


@dataclass(frozen=True)
class IterationRecord:
    epoch: int
    iteration: int
    n_paths: int
    l_sg: float
    l_xing: float
    total: float
    mse: float
    psnr: float


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    n_paths: int
    added: int
    mse: float
    psnr: float
    threshold: float | None
    converged: bool


class Vectorizer:
    """Owns the scene, optimizer state and seed masks across epochs.

    Paths are only ever appended, so a path's index is its layer for good.
    """

    def __init__(self, target: RasterImage, config: VectorizeConfig = VectorizeConfig(),
                 on_iteration: Callable[[IterationRecord], None] | None = None):
        if np.any(target.alpha < 1.0):
            target = composite_over_background(target, config.background)
        self.target = target
        self.config = config
        self.scene = VectorScene(target.width, target.height, np.asarray(config.background, dtype=float))
        self.adam = AdamState()
        self.seed_masks: list[np.ndarray] = []
        self.epoch = 0
        self.converged = False
        self._empty_epochs = 0
        self.history: list[IterationRecord] = []
        self.checkpoints: list[EpochRecord] = []
        self.last_segmentation: SegmentationStages | None = None
        self.on_iteration = on_iteration

    @property
    def stopped(self) -> bool:
        """True after two consecutive epochs found no region worth a new path."""
        return self._empty_epochs >= 2

    def _segment(self, current: RasterImage):
        cfg = self.config
        if cfg.seg_guidance:
            stages = segment_residual(self.target, current, cfg.loss.epsilon_seg)
            self.last_segmentation = stages
            return stages.result, stages.threshold
        seg = color_bin_components(self.target, current, cfg.loss.epsilon_seg, cfg.color_bins)
        return seg, None

    def run_epoch(self, n_new: int) -> EpochRecord:
        if n_new < 1:
            raise ValueError("n_new must be >= 1")
        self.epoch += 1
        cfg = self.config
        current = render(self.scene)
        seg, threshold = self._segment(current)
        chosen = select_regions(seg, n_new)
        first_new = len(self.scene.paths)
        for region in chosen:
            gp = init_path(region, self.target)
            if not cfg.use_gradient:
                gp.fill.stop1 = gp.fill.stop0.copy()
            self.scene.paths.append(gp)
            self.seed_masks.append(seg.mask(region.label))
        self.converged = not chosen
        self._empty_epochs = self._empty_epochs + 1 if not chosen else 0
        if chosen:
            log.info("epoch %d: added %d path(s), %d total", self.epoch, len(chosen), len(self.scene.paths))
        else:
            log.info("epoch %d: no region left to fit, refining %d path(s)", self.epoch, len(self.scene.paths))
        focus = slice(first_new, None) if chosen else slice(None)
        if self.scene.paths:
            self._optimize(focus)
        final = render(self.scene)
        err = mse(self.target, final)
        rec = EpochRecord(self.epoch, len(self.scene.paths), len(chosen), err, psnr_from_mse(err),
                          threshold, self.converged)
        self.checkpoints.append(rec)
        log.info("epoch %d: %d paths, psnr %.3f dB", rec.epoch, rec.n_paths, rec.psnr)
        return rec

    def _optimize(self, focus: slice) -> None:
        cfg = self.config
        lcfg = cfg.loss
        scene = self.scene
        size = (scene.width, scene.height)
        solid = not cfg.use_gradient
        # the contour-only loss keeps the plain sum normalization
        norm = lcfg.udf_normalization if cfg.seg_guidance else "sum"
        F = None
        for it in range(cfg.iterations_per_epoch):
            img, trace = forward(scene)
            shapes = [gp.shape for gp in scene.paths]
            try:
                udf = udf_weight(shapes[focus], size, lcfg.tau, normalize=norm)
            except ValueError:
                udf = np.zeros((scene.height, scene.width))
            if cfg.seg_guidance:
                if F is None or it % cfg.coverage_refresh == 0:
                    F = focused_set(scene, self.seed_masks)
                w = sg_weight(udf, F, lcfg.alpha_s)
            else:
                w = udf
            diff = img.rgb - self.target.rgb
            sq = np.einsum("ijc,ijc->ij", diff, diff)
            l_sg = float(np.sum(w * sq) / 3.0)
            l_xing, xgrads = xing_loss_and_grad(shapes)
            total = l_sg + lcfg.lambda_xing * l_xing
            err = float(sq.mean() / 3.0)
            rec = IterationRecord(self.epoch, it, len(scene.paths), l_sg, l_xing, total, err, psnr_from_mse(err))
            self.history.append(rec)
            if self.on_iteration is not None:
                self.on_iteration(rec)

            path_grads = render_backward(scene, sg_loss_grad(self.target, img, w), trace)
            for g, xg in zip(path_grads, xgrads):
                g["points"] = g["points"] + lcfg.lambda_xing * xg
            params = scene_params(scene, solid)
            grads = scene_grads(path_grads, solid)
            try:
                params = adam_step(params, grads, self.adam, cfg.lr_points, cfg.lr_fill)
            except FloatingPointError as exc:
                raise PipelineError(str(exc), self.epoch, it) from exc
            apply_params(scene, params)

    def run(self, counts: Sequence[int], on_epoch: Callable[["Vectorizer", EpochRecord], None] | None = None) -> VectorScene:
        """Run one epoch per entry of ``counts``, stopping early once nothing is left to fit."""
        for n in counts:
            rec = self.run_epoch(n)
            if on_epoch is not None:
                on_epoch(self, rec)
            if self.stopped:
                log.info("stopping early after epoch %d", self.epoch)
                break
        return self.scene


def vectorize(target: RasterImage, counts: Sequence[int], config: VectorizeConfig = VectorizeConfig()) -> VectorScene:
    return Vectorizer(target, config).run(counts)
