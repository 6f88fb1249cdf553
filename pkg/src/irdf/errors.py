"""Exception types shared across the package."""


class IrdfError(Exception):
    """Base class for all package errors."""


class NonStochastic(IrdfError):
    """A probability vector or a stochastic-matrix row does not sum to 1."""


class NegativeProbability(IrdfError):
    """A probability entry is negative beyond tolerance."""


class MonotonicityError(IrdfError):
    """A distortion transform is not strictly increasing on its working domain."""


class OutOfRange(IrdfError):
    """Value outside the invertible range of a transform."""


class LengthMismatch(IrdfError):
    """Paired sequences have different lengths."""


class EmptyInput(IrdfError):
    """An operation that needs at least one value received none."""


class DomainError(IrdfError):
    """Requested distortion level is outside the feasible domain."""


class NotConverged(IrdfError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class TooLarge(IrdfError):
    """Requested exhaustive enumeration exceeds the configured size cap."""
