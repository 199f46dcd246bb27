"""Immersion watershed over a gradient relief, used as an over-segmentation baseline.

The flooding follows the Vincent-Soille immersion scheme: pixels are processed
level by level in increasing relief order; each level's plateau is flooded
breadth-first from its already-labeled border so plateau membership is decided
by geodesic distance; pixels claimed by two distinct basins in the same wave
become watershed-line pixels (label 0); plateau pixels the flood never reaches
are new minima and each seeds one region. Waves are committed in batches, so
the outcome does not depend on scan order within a wave.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .edges import EdgeMap, gaussian_smooth, sobel_gradients
from .errors import ImageSmallerThanKernelError
from .glcm import FeatureMap
from .imaging import GrayImage, rescale_to_gray


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Region label per pixel; 0 marks watershed-line pixels."""

    labels: np.ndarray  # (h, w) int32
    region_count: int

    def __post_init__(self) -> None:
        lab = np.asarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise ValueError(f"label map must be 2-D, got shape {lab.shape}")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)


def gradient_magnitude(img: GrayImage, presmooth_sigma: float = 0.0) -> FeatureMap:
    """Sobel gradient magnitude sqrt(gx^2 + gy^2) with edge-replicated borders.

    presmooth_sigma > 0 applies a Gaussian blur first; the default leaves the
    relief raw, which is what makes the baseline over-segment noisy images.
    """
    if img.width < 3 or img.height < 3:
        raise ImageSmallerThanKernelError(
            f"gradient needs at least 3x3 pixels, got {img.width}x{img.height}"
        )
    values = img.pixels.astype(np.float64)
    if presmooth_sigma > 0:
        values = gaussian_smooth(values, presmooth_sigma)
    gx, gy = sobel_gradients(values)
    return FeatureMap(values=np.hypot(gx, gy), feature="gradient_magnitude")


def _flood(levels: np.ndarray, trace: list[int] | None = None) -> tuple[np.ndarray, int]:
    """Flood a 0..255 integer relief; returns flat labels and the region count.

    trace, when given, collects flat pixel indices in label-commit order (used
    to audit that flooding is monotone in relief value).
    """
    h, w = levels.shape
    n = h * w
    flat = levels.ravel()
    INIT, MASK = -2, -1
    lab = np.full(n, INIT, dtype=np.int64)
    order = np.argsort(flat, kind="stable")
    starts = np.searchsorted(flat[order], np.arange(257))
    queued = np.zeros(n, dtype=bool)
    next_label = 0

    def neighbors(p: int):
        r, c = divmod(p, w)
        if r > 0:
            yield p - w
        if r + 1 < h:
            yield p + w
        if c > 0:
            yield p - 1
        if c + 1 < w:
            yield p + 1

    for lv in range(256):
        lo, hi = starts[lv], starts[lv + 1]
        if lo == hi:
            continue
        level_pixels = [int(p) for p in order[lo:hi]]
        for p in level_pixels:
            lab[p] = MASK
        wave: list[int] = []
        for p in level_pixels:
            for q in neighbors(p):
                if lab[q] >= 0:
                    wave.append(p)
                    queued[p] = True
                    break
        while wave:
            # resolve the whole wave against pre-wave state, then commit
            resolved: list[int] = []
            for p in wave:
                first = 0
                conflict = False
                for q in neighbors(p):
                    lq = int(lab[q])
                    if lq > 0:
                        if first == 0:
                            first = lq
                        elif lq != first:
                            conflict = True
                resolved.append(0 if (conflict or first == 0) else first)
            for p, new_label in zip(wave, resolved):
                lab[p] = new_label
                if trace is not None:
                    trace.append(p)
            nxt: list[int] = []
            for p in wave:
                for q in neighbors(p):
                    if lab[q] == MASK and not queued[q]:
                        queued[q] = True
                        nxt.append(q)
            wave = nxt
        # what the flood never reached is a minimum plateau: one region each
        for p in level_pixels:
            if lab[p] == MASK:
                next_label += 1
                lab[p] = next_label
                if trace is not None:
                    trace.append(p)
                todo = deque([p])
                while todo:
                    x = todo.popleft()
                    for q in neighbors(x):
                        if lab[q] == MASK:
                            lab[q] = next_label
                            if trace is not None:
                                trace.append(q)
                            todo.append(q)
    return lab, next_label


def watershed_segment(relief: FeatureMap) -> LabelMap:
    """Immersion watershed of a relief quantized to 256 levels by min-max rescale."""
    quant = rescale_to_gray(relief.values).pixels
    lab, count = _flood(quant)
    return LabelMap(labels=lab.reshape(quant.shape).astype(np.int32), region_count=count)


def watershed_edges(lm: LabelMap) -> EdgeMap:
    """Watershed-line pixels plus pixels with a 4-neighbor of a different positive label."""
    lab = lm.labels
    mask = lab == 0
    pos = lab > 0
    horiz = (lab[:, :-1] != lab[:, 1:]) & pos[:, :-1] & pos[:, 1:]
    vert = (lab[:-1, :] != lab[1:, :]) & pos[:-1, :] & pos[1:, :]
    out = mask.copy()
    out[:, :-1] |= horiz
    out[:, 1:] |= horiz
    out[:-1, :] |= vert
    out[1:, :] |= vert
    return EdgeMap(mask=out)
