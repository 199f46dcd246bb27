"""Canny edge detection and edge superimposition, plus shared gradient filters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError, ImageSmallerThanKernelError
from .imaging import GrayImage

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])

# two neighbors compared against during non-maximum suppression, per sector;
# the first one is tested strictly so a symmetric two-pixel ridge keeps
# exactly one pixel instead of both
_SECTOR_NEIGHBORS = {
    0: ((0, -1), (0, 1)),
    1: ((-1, -1), (1, 1)),
    2: ((-1, 0), (1, 0)),
    3: ((-1, 1), (1, -1)),
}


@dataclass(frozen=True, eq=False)
class EdgeMap:
    """Boolean edge mask, same shape as its source image."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2:
            raise ValueError(f"edge mask must be 2-D, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)


@dataclass(frozen=True)
class CannyParams:
    """Gaussian sigma plus hysteresis thresholds relative to the max gradient."""

    sigma: float = 1.4
    low: float = 0.1
    high: float = 0.3

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not (0 < self.low <= self.high <= 1):
            raise ValueError("thresholds must satisfy 0 < low <= high <= 1")


def sobel_gradients(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical 3x3 Sobel responses, borders edge-replicated."""
    arr = np.asarray(values, dtype=np.float64)
    gx = ndimage.correlate(arr, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(arr, _SOBEL_Y, mode="nearest")
    return gx, gy


def gaussian_smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with kernel radius ceil(3*sigma), borders replicated."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    arr = np.asarray(values, dtype=np.float64)
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    kernel /= kernel.sum()
    out = ndimage.correlate1d(arr, kernel, axis=0, mode="nearest")
    return ndimage.correlate1d(out, kernel, axis=1, mode="nearest")


def _sectors(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient direction into the four 45-degree sectors."""
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    sector = np.zeros(ang.shape, dtype=np.int8)
    sector[(ang >= 22.5) & (ang < 67.5)] = 1
    sector[(ang >= 67.5) & (ang < 112.5)] = 2
    sector[(ang >= 112.5) & (ang < 157.5)] = 3
    return sector


def _suppress_nonmaxima(mag: np.ndarray, sector: np.ndarray) -> np.ndarray:
    """Keep pixels whose magnitude beats the leading neighbor strictly and the
    trailing neighbor at least weakly along the quantized gradient direction.
    Out-of-image neighbors count as zero magnitude."""
    h, w = mag.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = mag

    def view(dr: int, dc: int) -> np.ndarray:
        return padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]

    keep = np.zeros((h, w), dtype=bool)
    for s, ((r1, c1), (r2, c2)) in _SECTOR_NEIGHBORS.items():
        keep |= (sector == s) & (mag > view(r1, c1)) & (mag >= view(r2, c2))
    return keep


def canny(img: GrayImage, params: CannyParams = CannyParams()) -> EdgeMap:
    """Gaussian smoothing, Sobel gradients, non-maximum suppression, and
    double-threshold hysteresis with 8-connected weak-to-strong linking.

    Thresholds are fractions of the image's maximum gradient magnitude, so a
    constant image (zero gradient everywhere) yields an empty edge map.
    """
    if img.width < 3 or img.height < 3:
        raise ImageSmallerThanKernelError(
            f"edge detection needs at least 3x3 pixels, got {img.width}x{img.height}"
        )
    smoothed = gaussian_smooth(img.pixels.astype(np.float64), params.sigma)
    gx, gy = sobel_gradients(smoothed)
    mag = np.hypot(gx, gy)
    keep = _suppress_nonmaxima(mag, _sectors(gx, gy))
    if not keep.any():
        return EdgeMap(mask=keep)
    top = float(mag.max())
    strong = keep & (mag >= params.high * top)
    if not strong.any():
        return EdgeMap(mask=strong)
    weak = keep & (mag >= params.low * top)
    components, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    kept_ids = np.unique(components[strong])
    return EdgeMap(mask=np.isin(components, kept_ids) & weak)


def superimpose(original: GrayImage, em: EdgeMap) -> GrayImage:
    """Paint edge pixels white (255) onto a copy of the original image."""
    if em.mask.shape != original.pixels.shape:
        raise DimensionMismatchError(
            f"edge map shape {em.mask.shape} does not match image shape {original.pixels.shape}"
        )
    out = original.pixels.copy()
    out[em.mask] = 255
    return GrayImage(out)


def edge_image(em: EdgeMap) -> GrayImage:
    """Render an edge mask as a black/white image (edges are 255)."""
    return GrayImage(np.where(em.mask, 255, 0).astype(np.uint8))
