"""Exception hierarchy shared by all modules."""


class ChemostatError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ChemostatError, ValueError):
    """An argument lies outside the domain of a function."""


class NoPreimageError(DomainError):
    """A growth rate that the growth law never attains was inverted."""


class PoleError(DomainError):
    """``g = 1/beta`` was evaluated at one of its poles (0 or s_in)."""


class ConfigError(ChemostatError, ValueError):
    """Invalid model, design or run configuration."""


class IntegrationError(ChemostatError, RuntimeError):
    """The ODE integrator failed.

    The trajectory computed before the failure is kept in ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InconsistencyError(ChemostatError, RuntimeError):
    """A numerical result contradicts a proven property of the model.

    Seeing this means there is a bug (or the growth law violates the
    increasing/concave hypothesis), not bad input.
    """


class UndefinedCaseError(ChemostatError, ValueError):
    """A quantity was requested in a regime where it does not exist."""
