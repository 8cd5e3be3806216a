"""
Exception hierarchy for the sketched ALS library.

Every error raised on purpose by the library derives from SketchedAlsError so
callers (and the xbench CLI) can tell library failures apart from bugs.

CLI exit-code mapping:
    InvalidInputError, ConfigError, MemoryGuardError, IndexRangeError -> 2
    DegenerateInputError (and subclasses)                             -> 3
"""


class SketchedAlsError(Exception):
    """Base class for all errors raised by this package."""

    pass


class ConfigError(SketchedAlsError):
    """Raised when a user-supplied configuration value is invalid."""

    pass


class InvalidInputError(SketchedAlsError, ValueError):
    """Raised when an input value is malformed (negative weights, bad image, ...)."""

    pass


class ShapeError(InvalidInputError):
    """Raised when array shapes or tensor dims are incompatible."""

    pass


class FormatError(InvalidInputError):
    """Raised when a .dt or model file cannot be decoded."""

    pass


class IndexRangeError(SketchedAlsError, IndexError):
    """Raised when a mode or subindex is outside its valid range."""

    pass


class MemoryGuardError(SketchedAlsError):
    """Raised when a dense materialization would exceed the configured entry budget."""

    pass


class DegenerateInputError(SketchedAlsError):
    """Raised on numerical degeneracy: zero matrices, all singular values below cutoff."""

    pass


class DegenerateDistributionError(DegenerateInputError):
    """Raised when a sampling distribution has no positive mass left to draw from."""

    pass
