"""Exception hierarchy.

Each family maps onto one CLI exit code: validation problems exit with 2,
numerical guards with 3 and file/format problems with 4.
"""

from __future__ import annotations


class MpovError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ValidationError(MpovError, ValueError):
    """An input violates a documented precondition."""

    exit_code = 2


class NumericalGuardError(MpovError, ArithmeticError):
    """A sampling or boundary guard would make the numerical result unreliable."""

    exit_code = 3


class RingTooLargeError(NumericalGuardError):
    pass


class AliasingError(NumericalGuardError):
    pass


class WrapAroundError(NumericalGuardError):
    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class BandLimitError(NumericalGuardError):
    pass


class SpacingError(ValidationError):
    pass


class EqualChargeError(ValidationError):
    pass


class NoUniquePeakError(ValidationError):
    pass


class HalfMaxNotCrossedError(ValidationError):
    pass


class CircleThroughZeroError(ValidationError):
    pass


class ZeroPowerError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class NoDominantLobeError(ValidationError):
    pass


class DegenerateFitError(ValidationError):
    pass


class FieldFormatError(MpovError):
    """An MPOVF1 file could not be parsed."""

    exit_code = 4


class MagicMismatchError(FieldFormatError):
    pass


class TruncatedFieldError(FieldFormatError):
    pass


class NonFiniteFieldError(FieldFormatError):
    pass


class CutInsideRingWarning(UserWarning):
    """The demultiplexing radius cuts through a ring's bright band."""


class NegativeSlopeWarning(UserWarning):
    """The w(t)^2 fit has a negative slope; D is clamped to zero."""
