"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class PrefCQAError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(PrefCQAError):
    """A fact, constraint or query does not fit the declared schema."""


class EvaluationError(PrefCQAError):
    """Ill-typed comparison or open formula met during evaluation."""


class ArgumentError(PrefCQAError, ValueError):
    """An operation was called with arguments outside its contract."""


class PriorityError(PrefCQAError):
    """The priority relation is cyclic or orders non-conflicting facts."""

    def __init__(self, message: str, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class EnumerationLimitError(PrefCQAError):
    """Raised when more repairs exist than the caller allowed."""

    def __init__(self, cap: int):
        super().__init__(f"more than {cap} repairs; raise the limit to enumerate them all")
        self.cap = cap


class UnsupportedShapeError(PrefCQAError):
    """The input falls outside the shape a specialised algorithm handles."""


class ParseError(PrefCQAError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.source = source
