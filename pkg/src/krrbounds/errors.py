"""Exception types shared across the package.

Each maps to a stable CLI exit code.
"""


class KRRBoundsError(Exception):
    exit_code = 1


class InputError(KRRBoundsError, ValueError):
    """Malformed arguments or data (shapes, lengths, non-PSD matrices)."""

    exit_code = 2


class ConfigurationError(KRRBoundsError, ValueError):
    """Invalid or inconsistent configuration."""

    exit_code = 2


class NumericalError(KRRBoundsError, ArithmeticError):
    """A numerical routine failed beyond roundoff tolerance."""

    exit_code = 3
