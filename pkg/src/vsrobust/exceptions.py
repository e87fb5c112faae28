"""Exception hierarchy shared by all solver modules."""


class VsrError(Exception):
    """Base class for errors raised by this package."""


class DomainError(VsrError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(VsrError, ValueError):
    """An operation was called with structurally invalid inputs."""


class InfeasibleError(VsrError):
    """The combinatorial instance admits no feasible solution."""


class CapacityError(VsrError):
    """An enumeration or iteration cap was exceeded."""


class BackendError(VsrError):
    """An optimization backend failed; carries captured solver output."""

    def __init__(self, message, output=None):
        super().__init__(message)
        self.output = output


class StallError(VsrError):
    """The row-generation loop made no progress while a gap remained."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ParseError(VsrError, ValueError):
    """A file could not be parsed; message names the offending field."""
