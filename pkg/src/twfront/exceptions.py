"""Exception hierarchy shared by all twfront modules."""


class TwfrontError(Exception):
    """Base class for every error raised by the package."""


class DomainError(TwfrontError, ValueError):
    """An argument lies outside the domain of the evaluated function."""


class ConfigError(TwfrontError, ValueError):
    """A configuration file or mapping is malformed.

    ``key`` names the offending entry (dotted path) when known.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key is not None and not str(message).startswith(str(key)):
            message = f"{key}: {message}"
        super().__init__(message)


class DivergentIntegral(TwfrontError):
    pass


class QuadratureFailure(TwfrontError):
    pass


class PreconditionViolation(TwfrontError):
    pass


class StepFailure(TwfrontError):
    """The ODE integrator could not advance (step size underflow or similar)."""


class BracketFailure(TwfrontError):
    """The shooting residual does not change sign on the analytic bracket."""


class SingularIntegrand(TwfrontError):
    pass


class ClassificationConflict(TwfrontError):
    pass


class OutOfTheoremScope(TwfrontError):
    """Exponents fall outside every region covered by the classification."""


class InstabilityDetected(TwfrontError):
    pass


class NonPropagation(TwfrontError):
    pass
