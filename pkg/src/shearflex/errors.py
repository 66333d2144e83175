"""Exception types raised by shearflex.

The CLI maps :class:`ConfigurationError` to exit status 2 and every other
:class:`ShearflexError` to exit status 1.
"""


class ShearflexError(Exception):
    """Base class for all library errors."""


class ConfigurationError(ShearflexError, ValueError):
    """A parameter violates a documented precondition."""


class GridMismatchError(ShearflexError, ValueError):
    """Two fields that must share a grid do not."""


class ConditionVError(ShearflexError):
    """The shear profile is not certified to vanish to order n at y0."""


class QuiescenceViolation(ShearflexError):
    """A vortex support meets a region where the ambient shear is nonzero."""


class WindowOverlap(ShearflexError):
    """Two cutoff windows intersect."""


class PlateauViolation(ShearflexError):
    """A child vortex does not fit inside its parent's plateau annulus."""


class LevelOutOfRange(ShearflexError, ValueError):
    """Requested contour level is not strictly inside the field's range."""


class NotRegularError(ShearflexError):
    """An operation that needs a regular streamline received another kind."""


class EmptyBandError(ShearflexError):
    """A fluid sub-domain contains no grid samples."""


class CFLViolation(ShearflexError):
    """Time step exceeds the advective stability limit."""


class CoreLostError(ShearflexError):
    """The tracked vortex core could not be located in a frame."""


class NonLaminarError(ShearflexError):
    """The field has contractible streamlines where a laminar one is required."""


class BlowUpError(ShearflexError):
    """The evolved flow left the range the discretisation can follow."""
