"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range where the quantity is defined."""


class DimensionError(DomainError):
    """Two objects that must share a support or shape do not."""


class CapacityError(DomainError):
    """An exhaustive computation would exceed its enumeration budget."""


class InfeasibleCouplingError(DomainError):
    """Requested disagreement budget is below the total variation distance."""


class DegenerateLawError(DomainError):
    """A conditioning event carries zero probability mass."""


class HypothesisViolation(UserWarning):
    """A bound is evaluated outside the regime where it was proven."""
