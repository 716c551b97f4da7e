"""Exception hierarchy.

Evaluation errors stand in for reductions that would get stuck: a valid
execution never raises any of them.
"""

from __future__ import annotations


class JCRDTError(Exception):
    """Base class for every error raised by this package."""


class EvalError(JCRDTError):
    pass


class UnboundVariable(EvalError):
    pass


class GetOnHead(EvalError):
    pass


class IndexOutOfBounds(EvalError):
    pass


class NotAList(EvalError):
    pass


class NotAMap(EvalError):
    pass


class NotARegister(EvalError):
    pass


class HeadNotMutable(EvalError):
    """Assign or delete aimed at a list head position."""


class CursorMismatch(JCRDTError):
    """An operation's cursor does not fit the document it is applied to."""


class OperationDecodeError(JCRDTError, ValueError):
    def __init__(self, field: str, detail: str) -> None:
        super().__init__(f"{field}: {detail}")
        self.field = field
        self.detail = detail


class ScriptSyntaxError(JCRDTError):
    def __init__(self, message: str, line: int, column: int, expected: frozenset[str] = frozenset()):
        self.line = line
        self.column = column
        self.expected = expected
        text = f"line {line}, column {column}: {message}"
        if expected:
            text += " (expected one of: " + ", ".join(sorted(expected)) + ")"
        super().__init__(text)


class ScriptError(JCRDTError):
    """A directive failed while running a script."""

    def __init__(self, index: int, replica: str | None, cause: Exception) -> None:
        self.index = index
        self.replica = replica
        self.cause = cause
        super().__init__(f"directive {index} at replica {replica}: {type(cause).__name__}: {cause}")


class ExpectationFailed(JCRDTError):
    def __init__(self, index: int, replica: str, expected: str, actual: str) -> None:
        self.index = index
        self.replica = replica
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"directive {index}: replica {replica} render mismatch\n"
            f"  expected: {expected}\n  actual:   {actual}"
        )


class UnknownReplica(JCRDTError, KeyError):
    def __str__(self) -> str:
        return f"unknown replica {self.args[0]!r}"


class SyncDidNotConverge(JCRDTError):
    pass


class TooManyExtensions(JCRDTError):
    pass
