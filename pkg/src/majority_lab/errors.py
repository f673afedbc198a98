"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MajorityLabError(Exception):
    exit_code = 2


class UsageError(MajorityLabError, ValueError):
    """Bad arguments: out-of-range ids, unknown names, violated parameter constraints."""

    exit_code = 1


class ParameterError(UsageError):
    pass


class DataError(MajorityLabError):
    """Malformed input files or graphs that fail validation."""

    exit_code = 2


class PreconditionError(DataError):
    """The input graph lacks a structural property the operation needs (regularity, connectivity)."""

    def __init__(self, message, reason=None):
        super().__init__(message)
        self.reason = reason


class GenerationError(DataError):
    pass


class ConstructionError(DataError):
    pass


class NumericalError(MajorityLabError):
    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PeriodNotDetectedError(NumericalError):
    """Round cap hit without a period of 1 or 2. Since the period is provably <= 2, this means a bug."""
