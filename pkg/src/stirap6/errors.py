"""Exception hierarchy shared by the library and the command line front end."""


class Stirap6Error(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ConfigError(Stirap6Error, ValueError):
    exit_code = 1


class DomainError(Stirap6Error, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class DegenerateInputError(Stirap6Error, ValueError):
    """Couplings vanish so the requested frame or eigensystem is undefined."""

    exit_code = 2


class PreconditionError(Stirap6Error, ValueError):
    exit_code = 2


class IntegrationError(Stirap6Error, RuntimeError):
    def __init__(self, message, last_time):
        super().__init__(f"{message} (last good time t={last_time:.6g})")
        self.last_time = last_time


class NoConvergenceError(Stirap6Error, RuntimeError):
    """Inverse design could not reach the residual threshold.

    ``best`` holds the best candidate found (a ``DesignResult``).
    """

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


class VerificationError(Stirap6Error):
    exit_code = 4
