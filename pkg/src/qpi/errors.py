"""Exception types raised across the package."""


class QPIError(Exception):
    """Base class for all package errors."""


class ConfigError(QPIError, ValueError):
    pass


class DomainError(QPIError, ValueError):
    pass


class NodalPointError(QPIError, ArithmeticError):
    """|psi| fell below the nodal threshold where a kinetic ratio was required."""


class QuadratureError(QPIError, ArithmeticError):
    pass


class SamplingError(QPIError, RuntimeError):
    pass


class DivergenceError(QPIError, FloatingPointError):
    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")
