"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SumGPError(Exception):
    exit_code = 1


class ConfigError(SumGPError, ValueError):
    """Invalid hyperparameter, option or configuration value."""

    exit_code = 2


class DataError(SumGPError, ValueError):
    """Malformed, non-finite or inconsistent input data."""

    exit_code = 3


class NumericalError(SumGPError, ArithmeticError):
    exit_code = 4


class NotPSDError(NumericalError):
    """Cholesky failed even at the maximum jitter."""

    def __init__(self, msg, min_eigenvalue=None):
        super().__init__(msg)
        self.min_eigenvalue = min_eigenvalue
