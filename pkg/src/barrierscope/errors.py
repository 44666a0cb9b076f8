"""Exception types shared across the package."""


class BarrierscopeError(Exception):
    """Base class for all barrierscope errors."""


class DomainError(BarrierscopeError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class PotentialParseError(BarrierscopeError, ValueError):
    """Invalid potential definition text.

    Carries the 1-based line and column of the offending token when the
    problem is local to one; structural problems (coverage gaps, overlaps)
    report line 0.
    """

    def __init__(self, message, line=0, column=0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line:
            return f"line {self.line}, column {self.column}: {self.message}"
        return self.message


class ClosedChannelError(BarrierscopeError):
    """No propagating transmitted wave exists (E <= V on the exit side)."""


class InvalidIncidenceError(BarrierscopeError):
    """The incident wave itself is not propagating (E <= V on the entry side)."""


class DivergenceError(BarrierscopeError):
    """The integrated state blew up; ``x`` records where it happened."""

    def __init__(self, message, x=None):
        self.x = x
        super().__init__(message)


class BracketingError(BarrierscopeError):
    """An energy bracket does not isolate a sign change."""


class DegenerateInputError(BarrierscopeError, ValueError):
    """Input data carries no usable signal (e.g. an identically zero wave)."""
