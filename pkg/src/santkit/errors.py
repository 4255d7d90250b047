"""Exception hierarchy and the diagnostic record used by the validators.

Validators never raise: they return lists of :class:`Diagnostic`.  Everything
else (evaluation, parsing, firing, simulation) raises a subclass of
:class:`SantError`.
"""

from __future__ import annotations

from dataclasses import dataclass


class SantError(Exception):
    """Base class for all errors raised by this package."""


class SortMismatch(SantError):
    pass


class UnknownParameter(SantError):
    pass


class EvalError(SantError):
    """Base class for term-evaluation failures."""


class MissingContext(EvalError):
    pass


class IndexOutOfRange(EvalError):
    pass


class DivisionByZero(EvalError):
    pass


class DuplicateIndex(SantError):
    pass


class UnboundParameter(SantError):
    pass


class NotEnabled(SantError):
    pass


class NegativeMarking(SantError):
    pass


class InvalidParameter(SantError):
    pass


class InvalidConfig(SantError):
    pass


class UnsupportedReactivation(SantError):
    pass


class MaxEventsExceeded(SantError):
    pass


class NonStabilizingDetected(SantError):
    pass


class ParseError(SantError):
    """Syntax error with a 1-based source position and expected-token hints."""

    def __init__(self, message: str, line: int, column: int,
                 expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = expected
        suffix = ""
        if expected:
            suffix = " (expected %s)" % ", ".join(expected)
        super().__init__(f"{line}:{column}: {message}{suffix}")


@dataclass(frozen=True)
class Diagnostic:
    """One finding from a validator.

    ``severity`` is ``"error"`` or ``"warning"``; ``element`` names the model
    element the finding is about (when there is one) and ``span`` is a
    1-based (line, column) pair when the element came from a source file.
    """

    code: str
    message: str
    severity: str = "error"
    element: str | None = None
    span: tuple[int, int] | None = None

    def format(self) -> str:
        pos = f"{self.span[0]}:{self.span[1]}: " if self.span else ""
        where = f" [{self.element}]" if self.element else ""
        return f"{pos}{self.severity}: {self.code}: {self.message}{where}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diagnostics)


class ValidationError(SantError):
    """Raised when an operation requires a model that failed validation."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        lines = [d.format() for d in diagnostics if d.severity == "error"]
        super().__init__("validation failed:\n" + "\n".join(lines))
