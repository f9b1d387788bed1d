"""Exception types raised by the uavmotion package.

Grouped by the module that raises them; all inherit from UavMotionError so
callers can catch package failures with a single except clause.
"""

from __future__ import annotations


class UavMotionError(Exception):
    """Base class for all package-specific errors."""


# -- geometry ---------------------------------------------------------------

class DegenerateConfiguration(UavMotionError):
    """Point configuration cannot determine a homography (collinear/coincident)."""


class InsufficientInliers(UavMotionError):
    """RANSAC could not find a model supported by enough inliers."""


class PointAtInfinity(UavMotionError):
    """Projective division by a vanishing homogeneous coordinate."""


class SingularComposition(UavMotionError):
    """Cascaded homography product collapsed to a singular matrix."""


# -- features ---------------------------------------------------------------

class ImageTooSmall(UavMotionError):
    """Input raster is below the minimum size for feature detection."""


class OutOfBounds(UavMotionError):
    """Keypoint violates the sampling margin required by the descriptor."""


# -- motion -----------------------------------------------------------------

class DimensionMismatch(UavMotionError):
    """Operands have incompatible raster dimensions."""


class IntervalMismatch(UavMotionError):
    """Difference map was computed over the wrong frame interval."""


# -- attention --------------------------------------------------------------

class ShapeMismatch(UavMotionError):
    """Tensor shapes are inconsistent for the requested operation."""


class StrideMismatch(UavMotionError):
    """Feature-map stride does not match the expected pyramid level."""


# -- synth ------------------------------------------------------------------

class ConfigError(UavMotionError):
    """Synthetic sequence configuration is unsatisfiable."""


class IndexOutOfRange(UavMotionError):
    """Frame index outside the generated sequence."""


# -- io ---------------------------------------------------------------------

class DecodeError(UavMotionError):
    """File could not be decoded as a supported raster format."""


class WriteError(UavMotionError):
    """Output could not be serialized."""


class ParseError(UavMotionError):
    """Input is not syntactically valid."""


class ValidationError(UavMotionError):
    """Input is syntactically valid but violates the schema or a constraint."""


# -- pipeline ---------------------------------------------------------------

class EmptyInput(UavMotionError):
    """Operation requires at least one record or frame."""
