"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class HeckeSpanError(Exception):
    exit_code = 1


class UnsupportedInput(HeckeSpanError, ValueError):
    """Weight, level or parameter outside the supported domain."""

    exit_code = 2


class InsufficientPrecision(HeckeSpanError, ValueError):
    exit_code = 2


class DataUnavailable(HeckeSpanError, LookupError):
    """Coefficient data for a (level, weight) pair cannot be obtained."""

    exit_code = 3

    def __init__(self, level, weight, detail=""):
        self.level = level
        self.weight = weight
        msg = f"no cusp newform data for (level={level}, weight={weight})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CapacityError(HeckeSpanError, RuntimeError):
    """A computation would exceed a configured resource guard."""

    exit_code = 4


class BadPrime(HeckeSpanError, ValueError):
    exit_code = 2


class IngestionError(HeckeSpanError, ValueError):
    """External coefficient data failed schema validation."""

    exit_code = 3

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message if field is None else f"{message} (field: {field})")


class NetworkError(HeckeSpanError, OSError):
    exit_code = 3
    retryable = True


class Indeterminate(HeckeSpanError, ArithmeticError):
    """Interval arithmetic could not decide a sign."""

    exit_code = 1
