"""Exception hierarchy shared by all modules."""


class RydbergModelError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(RydbergModelError, ValueError):
    """A parameter file or parameter set is malformed or inconsistent."""


class ConfigurationError(RydbergModelError, ValueError):
    """A channel/parameter combination the model does not define."""


class DomainError(RydbergModelError, ValueError):
    """An argument lies outside the domain of a function."""


class NumericalError(RydbergModelError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class NoBoundRegionError(NumericalError):
    """Q(r) has no classically allowed region at the requested energy."""


class ToleranceNotMetError(NumericalError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NoRootError(NumericalError):
    """The quantization condition could not be bracketed."""


class GridTooCoarseError(NumericalError):
    """Halving the Numerov step moved the eigenvalue beyond tolerance."""


class NodeCountError(NumericalError):
    """The shooting solution has the wrong number of radial nodes."""


class NormalizationError(NumericalError):
    """The radial function does not decay at the outer grid edge."""


class BudgetExceededError(RydbergModelError):
    """A request exceeds the allowed problem size or wall-clock budget."""
