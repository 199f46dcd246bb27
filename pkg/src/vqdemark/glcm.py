"""Gray-level co-occurrence matrices and Haralick-style texture feature maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImageSmallerThanWindowError, NoPairsError
from .imaging import GrayImage, rescale_to_gray

# (row, col) step per angle, scaled by the pair distance
_OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}

FEATURES = ("max_probability", "variance", "correlation", "entropy")

# value reported for a window that holds no pixel pair at the offset: the
# limit of a constant window (single-cell distribution)
_DEGENERATE = {"max_probability": 1.0, "variance": 0.0, "correlation": 0.0, "entropy": 0.0}


@dataclass(frozen=True)
class GlcmParams:
    distance: int = 1
    angle: int = 0
    levels: int = 32
    window: int = 5
    symmetric: bool = True

    def __post_init__(self) -> None:
        if self.angle not in _OFFSETS:
            raise ValueError(f"angle must be one of {sorted(_OFFSETS)}, got {self.angle}")
        if not 2 <= self.levels <= 256:
            raise ValueError(f"levels must lie in [2, 256], got {self.levels}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.distance < 1:
            raise ValueError(f"distance must be >= 1, got {self.distance}")
        if self.distance >= self.window:
            raise ValueError(
                f"distance {self.distance} leaves no pairs in a {self.window}-wide window"
            )


@dataclass(frozen=True, eq=False)
class GlcmMatrix:
    """Normalized co-occurrence probabilities (levels x levels)."""

    probabilities: np.ndarray
    params: GlcmParams

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True)
class GlcmStats:
    mu_x: float
    mu_y: float
    sigma_x: float
    sigma_y: float


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Per-pixel real-valued feature image, same size as its source."""

    values: np.ndarray
    feature: str

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"feature map must be 2-D, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def quantize_levels(pixels: np.ndarray, levels: int) -> np.ndarray:
    """Map 8-bit intensities onto 0..levels-1 via floor(v * levels / 256)."""
    return (np.asarray(pixels).astype(np.int64) * levels) // 256


def _pair_counts(q: np.ndarray, params: GlcmParams) -> np.ndarray:
    """Co-occurrence counts of an already level-quantized window."""
    dr = _OFFSETS[params.angle][0] * params.distance
    dc = _OFFSETS[params.angle][1] * params.distance
    h, w = q.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r1 <= r0 or c1 <= c0:
        raise NoPairsError(
            f"no pixel pairs at distance {params.distance}, angle {params.angle} in a {h}x{w} window"
        )
    a = q[r0:r1, c0:c1].ravel()
    b = q[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
    L = params.levels
    counts = np.bincount(a * L + b, minlength=L * L).astype(np.float64).reshape(L, L)
    if params.symmetric:
        counts = counts + counts.T
    return counts


def compute_glcm(window: np.ndarray | GrayImage, params: GlcmParams = GlcmParams()) -> GlcmMatrix:
    """Co-occurrence probabilities of one window at (distance, angle).

    Intensities are quantized to params.levels bins first. When symmetric,
    each ordered pair is also accumulated in reverse, which makes the matrix
    exactly symmetric. Probabilities sum to 1.
    """
    win = window.pixels if isinstance(window, GrayImage) else np.asarray(window)
    if win.ndim != 2:
        raise ValueError(f"window must be 2-D, got shape {win.shape}")
    q = quantize_levels(win, params.levels)
    counts = _pair_counts(q, params)
    return GlcmMatrix(probabilities=counts / counts.sum(), params=params)


def glcm_stats(m: GlcmMatrix) -> GlcmStats:
    """Marginal means and standard deviations of the row/column distributions."""
    p = m.probabilities
    i = np.arange(p.shape[0], dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(np.sum(i * px))
    mu_y = float(np.sum(i * py))
    sigma_x = float(np.sqrt(np.sum((i - mu_x) ** 2 * px)))
    sigma_y = float(np.sqrt(np.sum((i - mu_y) ** 2 * py)))
    return GlcmStats(mu_x=mu_x, mu_y=mu_y, sigma_x=sigma_x, sigma_y=sigma_y)


def max_probability(m: GlcmMatrix) -> float:
    return float(m.probabilities.max())


def glcm_variance(m: GlcmMatrix) -> float:
    """Sum over (i, j) of (i - mu)^2 P_ij with mu the row-marginal mean."""
    p = m.probabilities
    i = np.arange(p.shape[0], dtype=np.float64)
    px = p.sum(axis=1)
    mu = float(np.sum(i * px))
    return float(np.sum((i - mu) ** 2 * px))


def glcm_correlation(m: GlcmMatrix, stats: GlcmStats | None = None) -> float:
    """Normalized cross-covariance of the pair distribution, in [-1, 1].

    Defined as 0 when either marginal deviation vanishes (single-level window).
    """
    s = stats if stats is not None else glcm_stats(m)
    denom = s.sigma_x * s.sigma_y
    if denom == 0.0:
        return 0.0
    p = m.probabilities
    i = np.arange(p.shape[0], dtype=np.float64)
    cross = float(np.sum(np.outer(i - s.mu_x, i - s.mu_y) * p))
    return cross / denom


def glcm_entropy(m: GlcmMatrix) -> float:
    """Shannon entropy -sum P_ij log2 P_ij with the 0 log 0 = 0 convention."""
    p = m.probabilities
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


_FEATURE_FUNCS = {
    "max_probability": max_probability,
    "variance": glcm_variance,
    "correlation": glcm_correlation,
    "entropy": glcm_entropy,
}


def feature_map(img: GrayImage, params: GlcmParams = GlcmParams(), feature: str = "entropy") -> FeatureMap:
    """Slide a centered window over the image and evaluate one feature per pixel.

    Borders are handled by edge replication, so the output has the source
    dimensions. The per-pixel value equals compute_glcm of the explicit
    (replicated) window followed by the feature function.
    """
    if feature not in _FEATURE_FUNCS:
        raise ValueError(f"unknown feature {feature!r}, expected one of {FEATURES}")
    if img.width < params.window or img.height < params.window:
        raise ImageSmallerThanWindowError(
            f"image {img.width}x{img.height} is smaller than the {params.window}-wide window"
        )
    half = params.window // 2
    padded = np.pad(img.pixels, half, mode="edge")
    q = quantize_levels(padded, params.levels)
    w = params.window
    func = _FEATURE_FUNCS[feature]
    values = np.empty((img.height, img.width), dtype=np.float64)
    for y in range(img.height):
        rows = q[y:y + w]
        for x in range(img.width):
            try:
                counts = _pair_counts(rows[:, x:x + w], params)
            except NoPairsError:
                values[y, x] = _DEGENERATE[feature]
                continue
            m = GlcmMatrix(probabilities=counts / counts.sum(), params=params)
            values[y, x] = func(m)
    return FeatureMap(values=values, feature=feature)


def render_feature(fm: FeatureMap) -> GrayImage:
    """Min-max rescale a feature map to an 8-bit image (constant map -> zeros)."""
    return rescale_to_gray(fm.values)
