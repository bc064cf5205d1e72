"""Exception hierarchy shared by all vcnls modules."""


class VCNLSError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(VCNLSError, ValueError):
    """Invalid user input (parameters, grids, initial data)."""


class PoleError(ValidationError):
    """Pochhammer symbol hits a pole (non-positive integer parameter)."""


class ConvergenceError(VCNLSError, ArithmeticError):
    """A series or iteration did not reach its tolerance."""


class DomainError(ValidationError):
    """Evaluation outside the declared time domain."""


class SingularCoefficientError(VCNLSError, ZeroDivisionError):
    """A coefficient that must be nonzero (the dispersion a(t)) vanished."""


class UnknownCaseError(ValidationError, KeyError):
    """Requested case id is not in the builtin catalog."""

    def __str__(self):  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class NumericalError(VCNLSError, ArithmeticError):
    """Base for failures of the numerical machinery (CLI exit code 3)."""


class IntegrationError(NumericalError):
    """Adaptive ODE integration failed to meet its tolerance."""


class BlowupEncountered(NumericalError):
    """The Riccati trajectory reached (or passed) a blow-up time."""


class SingularPointError(NumericalError):
    """A seed formula denominator vanished at the requested point."""


class IntegrabilityViolation(VCNLSError):
    """h(t) does not satisfy h = lambda*a*beta^2*mu^s on the domain."""


class GridTooCoarse(NumericalError):
    """The sampled field is not resolved by the grid."""


class StiffnessError(NumericalError):
    """Explicit time stepping collapsed its step size."""


class BoundaryLeakError(NumericalError):
    """Field mass reached a zero-Dirichlet boundary."""
