"""Block training vectors and codebook clustering by binary splitting.

The codebook generator follows the Linde-Buzo-Gray scheme: start from the
global centroid, double the codebook by perturbing every codevector with a
constant error, and relax each doubled codebook with Lloyd passes. A second
clustering run over the codevectors themselves merges them into a small number
of groups, which is what turns a fine 128-entry codebook into the 8 texture
classes used for segmentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyTrainingSetError,
    GeometryMismatchError,
    InvalidTargetSizeError,
)
from .imaging import GrayImage


@dataclass(frozen=True)
class BlockGeometry:
    """Block size and the grid of blocks covering a (possibly padded) image."""

    block_w: int
    block_h: int
    grid_w: int
    grid_h: int

    @property
    def dim(self) -> int:
        return self.block_w * self.block_h


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Row-major block vectors plus the geometry they were cut with."""

    vectors: np.ndarray  # (count, dim) float64
    geometry: BlockGeometry
    source_w: int
    source_h: int

    def __post_init__(self) -> None:
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"training vectors must form a 2-D array, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True)
class SplitParams:
    """Knobs for the split-and-relax codebook generator."""

    epsilon: float = 1.0
    lloyd_tol: float = 1e-4
    max_lloyd_iters: int = 50

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.lloyd_tol < 0:
            raise ValueError("lloyd_tol must be non-negative")
        if self.max_lloyd_iters < 1:
            raise ValueError("max_lloyd_iters must be at least 1")


@dataclass(frozen=True)
class LevelTrace:
    """Distortion after the initial assignment and after each Lloyd pass of one level."""

    size: int
    mse: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Codebook:
    """Ordered codevectors plus the distortion report of the run that built them.

    distortion is the mean squared Euclidean distance from each training vector
    to its codevector, divided by the vector dimension (per-component MSE).
    """

    codevectors: np.ndarray  # (size, dim) float64
    distortion: float
    level_trace: tuple[LevelTrace, ...]

    def __post_init__(self) -> None:
        cv = np.asarray(self.codevectors, dtype=np.float64)
        if cv.ndim != 2 or cv.shape[0] < 1:
            raise ValueError(f"codebook must be a non-empty 2-D array, got {cv.shape}")
        cv.setflags(write=False)
        object.__setattr__(self, "codevectors", cv)

    @property
    def size(self) -> int:
        return int(self.codevectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.codevectors.shape[1])


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Nearest-codevector label per training vector and per-cluster populations."""

    labels: np.ndarray  # (count,) int64
    counts: np.ndarray  # (codebook size,) int64


@dataclass(frozen=True, eq=False)
class GroupMap:
    """Group index per codevector, numbered by ascending group-centroid norm."""

    group_of: np.ndarray  # (codebook size,) int64
    group_count: int


def extract_training_vectors(img: GrayImage, block_w: int, block_h: int) -> TrainingSet:
    """Cut the image into block_w x block_h tiles, row-major, flattening each
    tile row-major into one training vector.

    Images whose sides are not multiples of the block size are padded on the
    right and bottom by edge replication before cutting.
    """
    if block_w < 1 or block_h < 1:
        raise ValueError("block dimensions must be positive")
    grid_w = -(-img.width // block_w)
    grid_h = -(-img.height // block_h)
    pad_r = grid_w * block_w - img.width
    pad_b = grid_h * block_h - img.height
    padded = np.pad(img.pixels, ((0, pad_b), (0, pad_r)), mode="edge").astype(np.float64)
    blocks = padded.reshape(grid_h, block_h, grid_w, block_w).swapaxes(1, 2)
    vectors = blocks.reshape(grid_h * grid_w, block_h * block_w)
    geometry = BlockGeometry(block_w=block_w, block_h=block_h, grid_w=grid_w, grid_h=grid_h)
    return TrainingSet(vectors=vectors, geometry=geometry, source_w=img.width, source_h=img.height)


def _nearest(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the squared-Euclidean-nearest center per row; ties go to the
    lowest index (argmin picks the first minimum). Chunked to bound temporaries."""
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int64)
    per_row = max(1, centers.shape[0] * centers.shape[1])
    step = max(1, 4_000_000 // per_row)
    for s in range(0, n, step):
        diff = X[s:s + step, None, :] - centers[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        labels[s:s + step] = np.argmin(dist, axis=1)
    return labels


def _mse(X: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    diff = X - centers[labels]
    return float(np.mean(np.einsum("ij,ij->i", diff, diff)) / X.shape[1])


def _update_centroids(X: np.ndarray, labels: np.ndarray, size: int, epsilon: float) -> np.ndarray:
    counts = np.bincount(labels, minlength=size)
    sums = np.zeros((size, X.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, X)
    centers = np.empty_like(sums)
    filled = counts > 0
    centers[filled] = sums[filled] / counts[filled, None]
    if not filled.all():
        # keep the codebook at full size: park empty cells next to the most
        # populous cluster so they can re-acquire members on the next pass
        donor = int(np.argmax(counts))
        centers[~filled] = centers[donor] + epsilon
    return centers


def _lloyd(X: np.ndarray, centers: np.ndarray, params: SplitParams):
    """Relax one codebook level. Stops when labels stabilize, the relative
    distortion gain drops below lloyd_tol, or max_lloyd_iters passes ran."""
    labels = _nearest(X, centers)
    mse = _mse(X, centers, labels)
    trace = [mse]
    for _ in range(params.max_lloyd_iters):
        centers2 = _update_centroids(X, labels, centers.shape[0], params.epsilon)
        labels2 = _nearest(X, centers2)
        mse2 = _mse(X, centers2, labels2)
        trace.append(mse2)
        stable = bool(np.array_equal(labels2, labels))
        gain = (mse - mse2) / mse if mse > 0 else 0.0
        centers, labels, mse = centers2, labels2, mse2
        if stable or gain < params.lloyd_tol:
            break
    return centers, labels, mse, trace


def _lbg_core(X: np.ndarray, target_size: int, params: SplitParams):
    if target_size < 1 or target_size & (target_size - 1):
        raise InvalidTargetSizeError(f"target size must be a power of two, got {target_size}")
    if X.shape[0] == 0:
        raise EmptyTrainingSetError("cannot build a codebook from zero vectors")
    centers = X.mean(axis=0, keepdims=True)
    labels = np.zeros(X.shape[0], dtype=np.int64)
    mse = _mse(X, centers, labels)
    traces = [LevelTrace(size=1, mse=(mse,))]
    while centers.shape[0] < target_size:
        centers = np.repeat(centers, 2, axis=0)
        centers[0::2] += params.epsilon
        centers[1::2] -= params.epsilon
        centers, labels, mse, trace = _lloyd(X, centers, params)
        traces.append(LevelTrace(size=centers.shape[0], mse=tuple(trace)))
    return centers, labels, mse, tuple(traces)


def lbg_generate(
    ts: TrainingSet, target_size: int, params: SplitParams = SplitParams()
) -> tuple[Codebook, ClusterAssignment]:
    """Grow a codebook 1 -> 2 -> 4 -> ... -> target_size by constant-error splitting.

    Every level doubles the codebook by replacing each codevector c with
    c + epsilon and c - epsilon (applied to every component), then runs Lloyd
    passes until the relative distortion improvement falls below lloyd_tol or
    max_lloyd_iters is hit. Returns the final codebook (with its per-level
    distortion trace) and the final nearest-codevector assignment.
    """
    centers, labels, mse, traces = _lbg_core(ts.vectors, target_size, params)
    counts = np.bincount(labels, minlength=centers.shape[0]).astype(np.int64)
    cb = Codebook(codevectors=centers, distortion=mse, level_trace=traces)
    return cb, ClusterAssignment(labels=labels, counts=counts)


def assign(ts: TrainingSet, cb: Codebook) -> ClusterAssignment:
    """Label every training vector with its nearest codevector (lowest index wins ties)."""
    X = ts.vectors
    if X.shape[1] != cb.dim:
        raise DimensionMismatchError(
            f"training vectors have dim {X.shape[1]}, codebook has dim {cb.dim}"
        )
    labels = _nearest(X, cb.codevectors)
    counts = np.bincount(labels, minlength=cb.size).astype(np.int64)
    return ClusterAssignment(labels=labels, counts=counts)


def requantize(cb: Codebook, group_count: int, params: SplitParams = SplitParams()) -> GroupMap:
    """Cluster the codevectors themselves into group_count groups with the same
    split-and-relax algorithm, then renumber groups by ascending centroid norm
    so group 0 is always the darkest texture class."""
    if group_count < 1 or group_count & (group_count - 1) or group_count > cb.size:
        raise InvalidTargetSizeError(
            f"group count must be a power of two in [1, {cb.size}], got {group_count}"
        )
    centers, labels, _, _ = _lbg_core(cb.codevectors, group_count, params)
    norms = np.sqrt(np.einsum("ij,ij->i", centers, centers))
    order = np.argsort(norms, kind="stable")
    rank = np.empty(group_count, dtype=np.int64)
    rank[order] = np.arange(group_count)
    return GroupMap(group_of=rank[labels], group_count=group_count)


def block_group_map(
    img: GrayImage, geometry: BlockGeometry, asg: ClusterAssignment, gm: GroupMap
) -> np.ndarray:
    """Per-pixel group index implied by the block assignment, cropped to img."""
    expected = geometry.grid_w * geometry.grid_h
    if asg.labels.shape[0] != expected:
        raise GeometryMismatchError(
            f"assignment covers {asg.labels.shape[0]} blocks, geometry has {expected}"
        )
    if geometry.grid_w * geometry.block_w < img.width or geometry.grid_h * geometry.block_h < img.height:
        raise GeometryMismatchError("block grid does not cover the image")
    if int(asg.labels.max()) >= gm.group_of.shape[0]:
        raise GeometryMismatchError("assignment labels exceed the group map size")
    per_block = gm.group_of[asg.labels].reshape(geometry.grid_h, geometry.grid_w)
    per_pixel = np.repeat(np.repeat(per_block, geometry.block_h, axis=0), geometry.block_w, axis=1)
    return per_pixel[: img.height, : img.width]


def cluster_images(
    img: GrayImage, geometry: BlockGeometry, asg: ClusterAssignment, gm: GroupMap
) -> list[GrayImage]:
    """One image per group: original pixels where the block belongs to the
    group, 0 elsewhere. The images partition the source pixel-wise."""
    per_pixel = block_group_map(img, geometry, asg, gm)
    return [
        GrayImage(np.where(per_pixel == g, img.pixels, 0))
        for g in range(gm.group_count)
    ]
