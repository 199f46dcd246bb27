"""End-to-end orchestration: configuration, phantom synthesis, the full
demarcation pipeline, baseline comparison metrics, and the on-disk report."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np
from scipy import ndimage

from .edges import CannyParams, EdgeMap, canny, edge_image, superimpose
from .errors import ConfigError, InvalidGeometryError
from .glcm import GlcmParams, feature_map, render_feature
from .imaging import GrayImage, histogram_equalize, load_image, save_image
from .vq import (
    ClusterAssignment,
    Codebook,
    GroupMap,
    SplitParams,
    block_group_map,
    cluster_images,
    extract_training_vectors,
    lbg_generate,
    requantize,
)
from .watershed import LabelMap, gradient_magnitude, watershed_edges, watershed_segment

EMIT_CHOICES = frozenset({"clusters", "edges", "superimposed", "glcm", "watershed", "report"})

# a foreground blob must span at least this many pixels to count as a segment
MIN_SEGMENT_PX = 9

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class PipelineConfig:
    codebook_size: int = 128
    group_count: int = 8
    block_w: int = 4
    block_h: int = 3
    split: SplitParams = field(default_factory=SplitParams)
    glcm: GlcmParams = field(default_factory=GlcmParams)
    canny: CannyParams = field(default_factory=CannyParams)
    output_dir: Path = field(default_factory=lambda: Path("vqdemark_out"))
    emit: frozenset = EMIT_CHOICES

    def validate(self) -> None:
        def power_of_two(v: int) -> bool:
            return v >= 1 and v & (v - 1) == 0

        if not power_of_two(self.codebook_size):
            raise ConfigError(f"codebook_size must be a power of two, got {self.codebook_size}")
        if not power_of_two(self.group_count):
            raise ConfigError(f"group_count must be a power of two, got {self.group_count}")
        if self.group_count > self.codebook_size:
            raise ConfigError("group_count cannot exceed codebook_size")
        if self.block_w < 1 or self.block_h < 1:
            raise ConfigError("block dimensions must be positive")
        unknown = set(self.emit) - EMIT_CHOICES
        if unknown:
            raise ConfigError(f"unknown emit flags: {sorted(unknown)}")


@dataclass(frozen=True)
class DiscTruth:
    """Ground-truth disc of a phantom, for tumor-isolation metrics."""

    cx: int
    cy: int
    r: int


@dataclass
class ComparisonReport:
    input_name: str
    codebook_size: int
    group_count: int
    block: tuple[int, int]
    codebook_distortion: float
    vq_occupied_groups: int
    vq_segment_counts: list[int]
    vq_best_group: int | None
    vq_best_group_segments: int | None
    watershed_region_count: int
    glcm_region_count: int
    tumor_capture_fraction: float | None
    tumor_boundary_recall: float | None
    timings_ms: dict[str, float]

    def to_dict(self) -> dict:
        phantom = None
        if self.tumor_capture_fraction is not None:
            phantom = {
                "tumor_capture_fraction": self.tumor_capture_fraction,
                "boundary_recall_2px": self.tumor_boundary_recall,
            }
        return {
            "input": self.input_name,
            "codebook_size": self.codebook_size,
            "group_count": self.group_count,
            "block": list(self.block),
            "codebook_distortion": self.codebook_distortion,
            "min_segment_px": MIN_SEGMENT_PX,
            "vq": {
                "occupied_groups": self.vq_occupied_groups,
                "segment_counts": list(self.vq_segment_counts),
                "best_group": self.vq_best_group,
                "best_group_segments": self.vq_best_group_segments,
            },
            "watershed": {"region_count": self.watershed_region_count},
            "glcm": {"region_count": self.glcm_region_count},
            "phantom_metrics": phantom,
            "timings_ms": dict(self.timings_ms),
        }


@dataclass
class PipelineArtifacts:
    clusters: list[GrayImage]
    edge_maps: list[EdgeMap]
    overlays: list[GrayImage]
    glcm_images: dict[str, GrayImage]
    label_map: LabelMap
    watershed_overlay: GrayImage
    codebook: Codebook
    assignment: ClusterAssignment
    group_map: GroupMap
    group_pixel_map: np.ndarray
    report: ComparisonReport


def thread_count() -> int:
    """Worker cap from VQDEMARK_THREADS; 0 (the default) means sequential."""
    raw = os.environ.get("VQDEMARK_THREADS", "0")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"VQDEMARK_THREADS must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ConfigError(f"VQDEMARK_THREADS must be >= 0, got {value}")
    return value


def disc_mask(width: int, height: int, cx: int, cy: int, r: int) -> np.ndarray:
    yy, xx = np.ogrid[:height, :width]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def generate_phantom(
    width: int,
    height: int,
    tumor_cx: int,
    tumor_cy: int,
    tumor_r: int,
    bg_mean: float = 60.0,
    tumor_mean: float = 200.0,
    noise_sigma: float = 10.0,
    seed: int = 0,
) -> GrayImage:
    """Noisy test image: a bright disc (the tumor) on a darker background.

    Gaussian noise is seeded, so a fixed seed always reproduces the same image.
    """
    if width < 1 or height < 1:
        raise InvalidGeometryError("phantom dimensions must be positive")
    if tumor_r <= 0:
        raise InvalidGeometryError("tumor radius must be positive")
    if not (tumor_r <= tumor_cx <= width - 1 - tumor_r and tumor_r <= tumor_cy <= height - 1 - tumor_r):
        raise InvalidGeometryError("tumor disc must fit inside the image")
    if not (0 <= bg_mean <= 255 and 0 <= tumor_mean <= 255):
        raise InvalidGeometryError("means must lie in [0, 255]")
    if noise_sigma < 0:
        raise InvalidGeometryError("noise_sigma must be non-negative")
    base = np.where(disc_mask(width, height, tumor_cx, tumor_cy, tumor_r), float(tumor_mean), float(bg_mean))
    if noise_sigma > 0:
        base = base + np.random.default_rng(seed).normal(0.0, noise_sigma, size=base.shape)
    return GrayImage(np.clip(np.floor(base + 0.5), 0.0, 255.0).astype(np.uint8))


def segment_count(mask: np.ndarray, min_px: int = MIN_SEGMENT_PX) -> int:
    """Number of 8-connected foreground components of at least min_px pixels."""
    labeled, n = ndimage.label(mask, structure=_EIGHT)
    if n == 0:
        return 0
    sizes = np.bincount(labeled.ravel())[1:]
    return int(np.count_nonzero(sizes >= min_px))


def _boundary_recall(disc: np.ndarray, edge_mask: np.ndarray, radius: int = 2) -> float:
    """Fraction of disc-boundary pixels with an edge pixel within `radius` (Euclidean)."""
    inner = ndimage.binary_erosion(disc, structure=ndimage.generate_binary_structure(2, 1))
    boundary = disc & ~inner
    total = int(boundary.sum())
    if total == 0:
        return 0.0
    yy, xx = np.ogrid[-radius:radius + 1, -radius:radius + 1]
    selem = xx * xx + yy * yy <= radius * radius
    near = ndimage.binary_dilation(edge_mask, structure=selem)
    return float((boundary & near).sum() / total)


def analyze(img: GrayImage, config: PipelineConfig, truth: DiscTruth | None = None,
            input_name: str = "image") -> PipelineArtifacts:
    """Run every method on one image and assemble the comparison report."""
    config.validate()
    workers = thread_count()
    t_start = perf_counter()

    # -- texture clustering ------------------------------------------------
    t0 = perf_counter()
    ts = extract_training_vectors(img, config.block_w, config.block_h)
    cb, asg = lbg_generate(ts, config.codebook_size, config.split)
    gm = requantize(cb, config.group_count, config.split)
    clusters = cluster_images(img, ts.geometry, asg, gm)
    pixel_groups = block_group_map(img, ts.geometry, asg, gm)
    vq_ms = (perf_counter() - t0) * 1000.0

    # -- per-group edge maps and overlays (the parallel grain) --------------
    t0 = perf_counter()

    def edge_job(cluster: GrayImage) -> tuple[EdgeMap, GrayImage]:
        em = canny(cluster, config.canny)
        return em, superimpose(img, em)

    if workers >= 2:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(edge_job, clusters))
    else:
        pairs = [edge_job(c) for c in clusters]
    edge_maps = [p[0] for p in pairs]
    overlays = [p[1] for p in pairs]
    canny_ms = (perf_counter() - t0) * 1000.0

    # -- co-occurrence feature maps -----------------------------------------
    t0 = perf_counter()
    prob_img = render_feature(feature_map(img, config.glcm, "max_probability"))
    ent_img = render_feature(feature_map(img, config.glcm, "entropy"))
    glcm_images = {
        "probability": prob_img,
        "probability_eq": histogram_equalize(prob_img),
        "entropy": ent_img,
        "entropy_eq": histogram_equalize(ent_img),
    }
    glcm_edges = canny(glcm_images["entropy_eq"], config.canny)
    glcm_ms = (perf_counter() - t0) * 1000.0

    # -- watershed baseline --------------------------------------------------
    t0 = perf_counter()
    lm = watershed_segment(gradient_magnitude(img))
    ws_overlay = superimpose(img, watershed_edges(lm))
    watershed_ms = (perf_counter() - t0) * 1000.0

    # -- comparison metrics ----------------------------------------------------
    occupied = int(np.count_nonzero(np.bincount(gm.group_of[asg.labels], minlength=gm.group_count)))
    seg_counts = [segment_count(pixel_groups == g) for g in range(gm.group_count)]
    glcm_regions = segment_count(~glcm_edges.mask)

    best_group = capture = recall = None
    best_segments = None
    if truth is not None:
        disc = disc_mask(img.width, img.height, truth.cx, truth.cy, truth.r)
        disc_total = int(disc.sum())
        if disc_total == 0:
            raise InvalidGeometryError("truth disc contains no pixels")
        captured = [int((disc & (pixel_groups == g)).sum()) for g in range(gm.group_count)]
        best_group = int(np.argmax(captured))
        capture = captured[best_group] / disc_total
        best_segments = seg_counts[best_group]
        recall = _boundary_recall(disc, edge_maps[best_group].mask)

    total_ms = (perf_counter() - t_start) * 1000.0
    report = ComparisonReport(
        input_name=input_name,
        codebook_size=config.codebook_size,
        group_count=config.group_count,
        block=(config.block_w, config.block_h),
        codebook_distortion=float(cb.distortion),
        vq_occupied_groups=occupied,
        vq_segment_counts=seg_counts,
        vq_best_group=best_group,
        vq_best_group_segments=best_segments,
        watershed_region_count=int(lm.region_count),
        glcm_region_count=glcm_regions,
        tumor_capture_fraction=None if capture is None else float(capture),
        tumor_boundary_recall=None if recall is None else float(recall),
        timings_ms={
            "vq": vq_ms,
            "canny": canny_ms,
            "glcm": glcm_ms,
            "watershed": watershed_ms,
            "total": total_ms,
        },
    )
    return PipelineArtifacts(
        clusters=clusters,
        edge_maps=edge_maps,
        overlays=overlays,
        glcm_images=glcm_images,
        label_map=lm,
        watershed_overlay=ws_overlay,
        codebook=cb,
        assignment=asg,
        group_map=gm,
        group_pixel_map=pixel_groups,
        report=report,
    )


def write_outputs(art: PipelineArtifacts, config: PipelineConfig) -> list[Path]:
    """Write the files selected by config.emit into config.output_dir."""
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def put(name: str, image: GrayImage) -> None:
        path = outdir / name
        save_image(image, path)
        written.append(path)

    if "clusters" in config.emit:
        for g, cluster in enumerate(art.clusters):
            put(f"cluster_{g}.pgm", cluster)
    if "edges" in config.emit:
        for g, em in enumerate(art.edge_maps):
            put(f"edges_{g}.pgm", edge_image(em))
    if "superimposed" in config.emit:
        for g, overlay in enumerate(art.overlays):
            put(f"overlay_{g}.pgm", overlay)
    if "glcm" in config.emit:
        put("glcm_probability.pgm", art.glcm_images["probability"])
        put("glcm_probability_eq.pgm", art.glcm_images["probability_eq"])
        put("glcm_entropy.pgm", art.glcm_images["entropy"])
        put("glcm_entropy_eq.pgm", art.glcm_images["entropy_eq"])
    if "watershed" in config.emit:
        put("watershed.pgm", art.watershed_overlay)
    if "report" in config.emit:
        path = outdir / "report.json"
        path.write_text(json.dumps(art.report.to_dict(), indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written


def run_pipeline(config: PipelineConfig, input_path: str | Path,
                 truth: DiscTruth | None = None) -> ComparisonReport:
    """Load an image, run everything, write the selected outputs, return the report."""
    img = load_image(input_path)
    art = analyze(img, config, truth, input_name=str(input_path))
    write_outputs(art, config)
    return art.report


def compare_methods(input_path: str | Path, config: PipelineConfig,
                    truth: DiscTruth | None = None) -> ComparisonReport:
    """Run every method on the input and return the comparison report only."""
    img = load_image(input_path)
    return analyze(img, config, truth, input_name=str(input_path)).report
