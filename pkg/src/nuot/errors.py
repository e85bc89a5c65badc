class NuotError(Exception):
    """Base class; carries the CLI exit code."""
    exit_code = 1


class ValidationError(NuotError, ValueError):
    exit_code = 2


class UnsupportedCostError(ValidationError):
    pass


class SolverError(NuotError, RuntimeError):
    exit_code = 3
