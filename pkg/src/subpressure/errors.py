"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`PressureError`.
The three intermediate classes line up with the CLI exit codes: input errors
exit with 2, violated mathematical preconditions with 3, resource caps with 4.
"""


class PressureError(Exception):
    """Base class for all library errors."""


class InputError(PressureError, ValueError):
    """Malformed input: wrong shape, out-of-domain argument, bad file."""


class PreconditionError(PressureError):
    """The input is well formed but a mathematical hypothesis does not hold."""


class ResourceCapError(PressureError):
    """A computation would exceed a configured resource limit."""


class DimensionError(InputError):
    pass


class DomainError(InputError):
    pass


class SingularMatrixError(PreconditionError):
    pass


class NotTriangularError(PreconditionError):
    pass


class NotContractingError(PreconditionError):
    pass


class IdenticallyZeroError(PreconditionError):
    """Raised when a zero count is requested for the zero polynomial."""


class EnumerationCapError(ResourceCapError):
    pass


class NonContractingWarning(UserWarning):
    """Triangular reduction applied to a system that is not contracting."""
