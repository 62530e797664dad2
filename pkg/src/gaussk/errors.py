class GausskError(Exception):
    """Base class for all package errors."""


class DimensionError(GausskError, ValueError):
    pass


class NotSymplecticError(GausskError, ValueError):
    pass


class InvariantError(GausskError, ValueError):
    pass


class BranchError(GausskError, ValueError):
    """Logarithm requested off the principal branch (a rotation angle equals pi)."""


class ParameterError(GausskError, ValueError):
    pass


class NumericError(GausskError, ArithmeticError):
    pass


class CoverageError(GausskError):
    """A level-0 lookup landed farther than the net radius."""


class DivergenceError(GausskError):
    """The recursion failed to reduce the error across a level."""

    def __init__(self, message, level=None, errors=None):
        super().__init__(message)
        self.level = level
        self.errors = list(errors or [])


class InfeasibleError(GausskError, ValueError):
    """No state satisfies the energy constraint."""


class IdenticalChannelsError(GausskError, ValueError):
    pass


class NoFiniteBoundError(GausskError, ValueError):
    pass
