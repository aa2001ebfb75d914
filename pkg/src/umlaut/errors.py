"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class UmlautError(Exception):
    exit_code = 1


class DocumentError(UmlautError, ValueError):
    """Malformed input document (schema violation)."""

    exit_code = 2


class InvariantError(UmlautError, ValueError):
    """Numerical invariant violated (non-Hermitian, non-PSD, wrong trace, ...)."""

    exit_code = 3


class ConvergenceError(UmlautError, RuntimeError):
    exit_code = 4


class SizeGuardError(UmlautError, ValueError):
    """Problem exceeds the desk-scale limits of a dense method."""

    exit_code = 5
