"""Exception hierarchy shared by the library and the CLI."""


class PptMixError(Exception):
    """Base class for all errors raised by pptmix."""

    exit_code = 1


class InvalidArgumentError(PptMixError, ValueError):
    exit_code = 2


class ResourceLimitError(PptMixError):
    """Problem size exceeds a configured or memory-motivated bound."""

    exit_code = 4


class SolverError(PptMixError):
    exit_code = 3


class PreconditionError(PptMixError):
    """An operation was called on an input it is not defined for."""

    exit_code = 2
