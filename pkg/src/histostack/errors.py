"""Exception hierarchy shared across the toolkit.

Plain I/O failures (missing files, unwritable directories) are left to the
built-in OSError family; everything domain-specific derives from
HistostackError so callers can catch one base class at API boundaries.
"""


class HistostackError(Exception):
    """Base class for all domain errors raised by this package."""


class UnsupportedDtype(HistostackError):
    """Tensor dtype outside the supported set (uint8, float32, int64)."""


class FormatError(HistostackError):
    """File does not conform to the expected binary layout."""


class UnsupportedLayout(HistostackError):
    """Tensor file declares a memory order other than row-major."""


class BundleInvalid(HistostackError):
    """Dataset bundle violates its structural invariants."""


class EmptyClass(HistostackError):
    """A class directory contains no images."""


class DecodeError(HistostackError):
    """Image file cannot be decoded to an 8-bit 3-channel raster."""


class ClassTooSmall(HistostackError):
    """A class has too few samples to split across train/val/test."""


class BadRatios(HistostackError):
    """Split ratios are malformed or leave a split empty."""


class DataLeak(HistostackError):
    """Identical file bytes found in more than one split."""


class DegenerateLabels(HistostackError):
    """Label vector unusable for fitting (empty, or single-class where two are required)."""


class BadInput(HistostackError):
    """Feature matrix contains non-finite values."""


class ShapeError(HistostackError):
    """Array dimensions do not match what the operation requires."""


class BadKernelParams(HistostackError):
    """Kernel parameters outside their valid domain."""


class BadLabel(HistostackError):
    """Label value outside [0, n_classes)."""


class AlignmentError(HistostackError):
    """Feature sources disagree on sample counts for a split."""


class ProvenanceError(HistostackError):
    """Feature sources or models trace back to different dataset manifests."""


class GridExhausted(HistostackError):
    """Every candidate in a parameter grid failed to fit."""


class NothingToCurate(HistostackError):
    """No parseable run records found under the given directories."""
