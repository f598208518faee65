"""Exception hierarchy shared by the library and the CLI."""


class JigsawError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(JigsawError, ValueError):
    """Malformed input: bad bitstrings, width mismatches, out-of-range indices."""


class EmptyInputError(ValidationError):
    """A histogram with no trials at all."""


class DegenerateUpdateError(JigsawError, ArithmeticError):
    """A marginal shares no reduced outcome with the distribution it updates."""

    def __init__(self, message, marginal_index=None):
        super().__init__(message)
        self.marginal_index = marginal_index
