"""Exception hierarchy shared across jcsim."""


class JCSimError(Exception):
    """Base class for every error raised by jcsim."""


class ConfigError(JCSimError, ValueError):
    """Invalid parameter or configuration value."""


class DomainError(JCSimError, ValueError):
    """Function evaluated at a point outside its domain (e.g. on a pole)."""


class StructuralError(JCSimError, ValueError):
    """Array shapes or state layouts that do not fit together."""


class NumericalError(JCSimError, ArithmeticError):
    """A numerical routine failed to converge or produced invalid values."""


class IntegrationError(NumericalError):
    """The time integrator failed; ``t`` is the time at which it stopped."""

    def __init__(self, message, t):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t
