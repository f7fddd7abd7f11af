"""Exception types raised across the package.

All of them derive from :class:`TeleportError`, itself a ``ValueError``, so a
caller can catch everything bad-input related in one place.
"""


class TeleportError(ValueError):
    """Base class for every domain error in the package."""


class CutoffTooSmall(TeleportError):
    """The Fock cutoff cannot hold the state to the required tail tolerance."""


class InvalidSpec(TeleportError):
    """A state specification has missing, extra or out-of-range fields."""


class DimMismatch(TeleportError):
    pass


class NotPure(TeleportError):
    pass


class InvalidTransmittance(TeleportError):
    pass


class InvalidSqueezing(TeleportError):
    pass


class QuadratureNotConverged(TeleportError):
    pass


class GridTooSmall(TeleportError):
    pass


class InvalidTau(TeleportError):
    pass


class NotRepresentable(TeleportError):
    """The smoothed Gaussian has a non-positive principal variance."""


class UnsupportedSpec(TeleportError):
    pass


class OrderOutOfRange(TeleportError):
    """The displaced-number series for W^(s) diverges for s >= 1/2."""


class InvalidDensityMatrix(TeleportError):
    """Hermiticity, trace or positivity check failed."""
