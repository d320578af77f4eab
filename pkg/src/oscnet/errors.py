"""Exception hierarchy shared by all oscnet modules."""

from __future__ import annotations


class OscNetError(Exception):
    """Base class for every error raised by this package."""


class InvalidValueError(OscNetError):
    """Non-finite input where a finite real is required."""


class NearSingularPhaseError(OscNetError):
    """Phase within the guard band of an odd multiple of pi/2; tan readout unstable."""


class DegenerateNormalizationError(OscNetError):
    """Weight sum too close to zero relative to the total weight magnitude."""

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class NotSettledError(OscNetError):
    """Integration exhausted max_steps before reaching the settle tolerance.

    The partial trajectory computed so far is attached as ``trajectory``.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NumericOverflowError(OscNetError):
    """An update produced non-finite entries or magnitudes beyond 1e12."""


class DegenerateFeatureError(OscNetError):
    """Feature column with zero sum of squares cannot be solved for."""


class NotConvergedError(OscNetError):
    """Iterative solver exhausted its budget; last iterate attached as ``theta``."""

    def __init__(self, message: str, theta=None):
        super().__init__(message)
        self.theta = theta


class ZeroVectorError(OscNetError):
    """Zero vector where a direction is required."""


class EmptyClusterError(OscNetError):
    """Empty-cluster repair failed (no candidate sample to re-seed from)."""


class IdxFormatError(OscNetError):
    """Base class for IDX container violations."""


class BadMagicError(IdxFormatError):
    """IDX magic number is not one of the known image/label values."""


class LengthMismatchError(IdxFormatError):
    """IDX payload length does not match the product of its dimensions."""


class CountMismatchError(IdxFormatError):
    """Image and label files disagree on the number of items."""


class UnknownVersionError(OscNetError):
    """Persisted artifact carries an unsupported version tag."""
