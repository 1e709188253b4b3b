"""Exception hierarchy shared by every kpart module."""


class KpartError(Exception):
    """Base class for all kpart errors."""


class ContractError(KpartError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(KpartError, ValueError):
    """A numeric input lies outside the domain of an operation."""


class DataFormatError(KpartError, ValueError):
    """An input file is missing columns or holds unparseable cells."""


class EmptySeriesError(KpartError, ValueError):
    """An input yielded no usable observations."""


class InsufficientDataError(KpartError):
    """Too few observations for the requested number of parameters."""


class SingularDesignError(KpartError):
    """The design matrix is numerically rank deficient.

    Attributes
    ----------
    dependent_roles : tuple of str
        Column roles found to be linearly dependent on the others.
    """

    def __init__(self, message, dependent_roles=()):
        super().__init__(message)
        self.dependent_roles = tuple(dependent_roles)


class NoFeasibleModelError(KpartError):
    """Every enumerated knot subset was infeasible."""
