"""Exception types shared across the package.

File-system failures (missing paths, unwritable directories) are not wrapped;
they surface as the interpreter's usual OSError family.
"""


class MalformedFileError(ValueError):
    """Image file has a bad magic number or an unparseable header."""


class UnsupportedDepthError(ValueError):
    """Image file is not 8-bit single-channel."""


class EmptyImageError(ValueError):
    """Image has zero pixels."""


class InvalidTargetSizeError(ValueError):
    """Requested codebook or group size is not a power of two, or is out of range."""


class EmptyTrainingSetError(ValueError):
    """No training vectors supplied."""


class DimensionMismatchError(ValueError):
    """Operands disagree on vector dimension or image shape."""


class GeometryMismatchError(ValueError):
    """Block geometry does not cover the image or the assignment."""


class NoPairsError(ValueError):
    """Window too small to contain any pixel pair at the requested offset."""


class ImageSmallerThanWindowError(ValueError):
    """Image smaller than the sliding window."""


class ImageSmallerThanKernelError(ValueError):
    """Image smaller than the convolution kernel."""


class InvalidGeometryError(ValueError):
    """Phantom geometry does not fit inside the image."""


class ConfigError(ValueError):
    """Pipeline configuration failed validation."""
