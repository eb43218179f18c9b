"""Exception types raised across the package."""


class SojetError(Exception):
    """Base class for all package errors."""


class NonFiniteValue(SojetError, ArithmeticError):
    """An oracle returned NaN or Inf."""


class UnknownProblem(SojetError, KeyError):
    pass


class DimensionTooSmall(SojetError, ValueError):
    pass


class DimensionTooLarge(SojetError, ValueError):
    pass


class EmptyModel(SojetError, ValueError):
    """A model set without elements was passed where one is required."""


class AllRestartsInfeasible(SojetError, RuntimeError):
    """Every start of the subproblem solver ended at an infeasible point."""


class EmptyResults(SojetError, ValueError):
    pass
