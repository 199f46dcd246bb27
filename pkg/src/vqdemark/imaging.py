"""Grayscale image type, bit-exact PGM and PNG I/O, histograms, equalization."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PilImage
from PIL import UnidentifiedImageError

from .errors import EmptyImageError, MalformedFileError, UnsupportedDepthError

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale raster stored as a read-only (height, width) array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"pixel grid must be 2-D, got shape {px.shape}")
        if px.size == 0:
            raise EmptyImageError("image width and height must be positive")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.integer):
                raise ValueError("intensities must be integers in [0, 255]")
            if int(px.min()) < 0 or int(px.max()) > 255:
                raise ValueError("intensities must lie in [0, 255]")
        px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class Histogram:
    """256-bin intensity histogram; total equals the source pixel count."""

    counts: np.ndarray
    total: int


def histogram(img: GrayImage) -> Histogram:
    counts = np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)
    counts.setflags(write=False)
    return Histogram(counts=counts, total=int(counts.sum()))


def _parse_pgm(data: bytes) -> GrayImage:
    """Parse a binary (P5) PGM. Header comments and arbitrary whitespace are
    accepted; exactly one whitespace byte separates the maxval from the raster."""
    if not data.startswith(b"P5"):
        raise MalformedFileError("not a binary PGM file (magic is not P5)")
    pos, end = 2, len(data)
    fields: list[bytes] = []
    while len(fields) < 3:
        while pos < end and data[pos] in _WHITESPACE:
            pos += 1
        if pos < end and data[pos:pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise MalformedFileError("unterminated header comment")
            pos = nl + 1
            continue
        start = pos
        while pos < end and data[pos] not in _WHITESPACE and data[pos:pos + 1] != b"#":
            pos += 1
        if pos == start:
            raise MalformedFileError("truncated PGM header")
        fields.append(data[start:pos])
    if pos >= end or data[pos] not in _WHITESPACE:
        raise MalformedFileError("missing whitespace between header and raster")
    pos += 1
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise MalformedFileError("non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise MalformedFileError("PGM dimensions must be positive")
    if maxval != 255:
        raise UnsupportedDepthError(f"only maxval 255 is supported, got {maxval}")
    expected = width * height
    raster = data[pos:pos + expected]
    if len(raster) < expected:
        raise MalformedFileError("PGM raster shorter than width*height bytes")
    return GrayImage(np.frombuffer(raster, dtype=np.uint8).reshape(height, width))


def _load_png(path: Path) -> GrayImage:
    try:
        with PilImage.open(path) as im:
            if im.mode != "L":
                raise UnsupportedDepthError(
                    f"only 8-bit single-channel PNG is supported, got mode {im.mode!r}"
                )
            return GrayImage(np.asarray(im, dtype=np.uint8))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        # the file itself was readable, so a decoder failure means bad content
        raise MalformedFileError(f"cannot decode PNG data in {path}") from exc


def load_image(path: str | Path) -> GrayImage:
    """Load a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG."""
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(_PNG_MAGIC):
        return _load_png(path)
    if data.startswith(b"P5"):
        return _parse_pgm(data)
    raise MalformedFileError(f"unrecognized image format: {path}")


def save_image(img: GrayImage, path: str | Path, format: str | None = None) -> None:
    """Write img as binary PGM or PNG; format defaults to the path suffix.

    The written PGM header is always exactly ``P5\\n{w} {h}\\n255\\n`` followed by
    the raw row-major raster, so identical images produce identical bytes.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.pixels.tobytes())
    elif fmt == "png":
        PilImage.fromarray(img.pixels, mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported image format {fmt!r} (use 'pgm' or 'png')")


def equalization_lut(hist: Histogram) -> np.ndarray:
    """256-entry remap: cumulative histogram stretched so the lowest occupied
    bin lands on 0. A single-bin histogram maps everything to 0."""
    cdf = np.cumsum(hist.counts, dtype=np.int64)
    occupied = np.flatnonzero(hist.counts)
    if occupied.size == 0:
        return np.zeros(256, dtype=np.uint8)
    cdf_min = int(hist.counts[occupied[0]])
    span = hist.total - cdf_min
    if span <= 0:
        return np.zeros(256, dtype=np.uint8)
    scaled = 255.0 * (cdf - cdf_min) / span
    return np.clip(np.floor(scaled + 0.5), 0.0, 255.0).astype(np.uint8)


def histogram_equalize(img: GrayImage) -> GrayImage:
    """Remap intensities through the anchored cumulative-histogram transform."""
    lut = equalization_lut(histogram(img))
    return GrayImage(lut[img.pixels])


def rescale_to_gray(values: np.ndarray) -> GrayImage:
    """Min-max rescale real values onto 0..255, rounding half up.

    Constant input renders as all zeros rather than dividing by zero.
    """
    v = np.asarray(values, dtype=np.float64)
    lo = float(v.min())
    hi = float(v.max())
    if not hi > lo:
        return GrayImage(np.zeros(v.shape, dtype=np.uint8))
    scaled = np.floor(255.0 * (v - lo) / (hi - lo) + 0.5)
    return GrayImage(scaled.astype(np.uint8))
