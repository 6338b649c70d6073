"""Exception types raised across the package."""


class QHGeomError(ValueError):
    """Base class for all package errors."""


class InvalidInputError(QHGeomError):
    """Malformed, non-finite or out-of-range input."""


class OutsideDomainError(QHGeomError):
    """A point that must lie in the domain does not."""


class UnsupportedCombinationError(QHGeomError):
    """A norm/domain or metric/domain pairing that is not implemented."""


class PathExitsDomainError(QHGeomError):
    """A polyline segment leaves the domain."""


class ResolutionTooCoarseError(QHGeomError):
    """A grid or graph is too coarse (or too small) for the requested query."""


class NotPowerTypeError(QHGeomError):
    """Modulus samples are incompatible with a power-type fit."""


class EmptyEffectiveSetError(QHGeomError):
    """Every input item was skipped, nothing left to evaluate."""


class PreconditionError(QHGeomError):
    """A named precondition of a computation is violated.

    Attributes
    ----------
    condition : str
        Short label of the failed condition, e.g. ``"i"``.
    """

    def __init__(self, condition, message):
        super().__init__(f"condition {condition} violated: {message}")
        self.condition = condition
