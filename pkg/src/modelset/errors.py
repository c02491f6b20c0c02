"""Exception hierarchy shared by all modules."""


class ModelSetError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ModelSetError, ValueError):
    """Malformed scheme file or command parameters."""


class BudgetExceeded(ModelSetError):
    """An enumeration would exceed the configured point budget."""


class RegionTooLarge(BudgetExceeded):
    pass


class EnumerationBudget(BudgetExceeded):
    pass


class SingularBasis(ModelSetError, ValueError):
    pass


class NotALatticeProjection(ModelSetError, ValueError):
    pass


class NotExact(ModelSetError, ValueError):
    pass


class ZeroMeasureWindow(ModelSetError, ValueError):
    pass


class UnsupportedWindowGeometry(ModelSetError, ValueError):
    pass


class CutoffTooSmall(ModelSetError, ValueError):
    pass


class TooFewPoints(ModelSetError, ValueError):
    pass


class RegionTooThin(ModelSetError, ValueError):
    pass


class MarginTooSmall(ModelSetError, ValueError):
    pass


class IncompletePatch(ModelSetError, ValueError):
    pass


class QuadratureFailure(ModelSetError, ArithmeticError):
    pass


class IncompleteSearchWarning(UserWarning):
    """Hits were found on the boundary of the integer search box."""
