"""Exception types shared across the package."""


class QgadError(Exception):
    """Base class for all package errors."""


class DomainError(QgadError, ValueError):
    """A value lies outside its mathematical domain."""


class FormatError(QgadError, ValueError):
    """Malformed input text or an ill-shaped data grid."""


class LayoutError(QgadError, ValueError):
    """Register widths or positions do not match the operation."""


class ResourceError(QgadError):
    """The request exceeds a configured resource limit (for example the qubit cap)."""


class LogicError(QgadError):
    """An internal contract was broken, such as a non-bijective permutation."""


class PostselectionImpossibleError(QgadError):
    """The requested measurement pattern carries (numerically) zero probability."""


class DataAccessError(QgadError, IndexError):
    """An oracle was queried at an index outside the dataset."""


class UnsupportedWidthError(QgadError, ValueError):
    """A register width outside the supported range for this construction."""


class DegenerateDataError(QgadError):
    """Data without enough variation for the requested statistic."""


class UnboundedShotsError(QgadError):
    """A shot bound diverges because a magnitude floor is zero."""


class BoundInvalidError(QgadError):
    """An error-bound proviso fails, so the bound formula does not apply."""
