"""Exception types shared across the package.

Shape and range violations raise plain ``ValueError``; the classes below mark
failures the command line maps to distinct exit codes.
"""


class ConfigError(ValueError):
    """Invalid or unknown configuration (exit code 1)."""


class DataError(ValueError):
    """Dataset missing, truncated or malformed (exit code 2)."""


class NumericalError(ArithmeticError):
    """Non-finite values or singular systems during a run (exit code 3)."""
