"""Coded diagnostics and source locations shared by parsers, resolution and validation."""

from __future__ import annotations

from dataclasses import dataclass, field

SEVERITIES = ("error", "warning", "info")

_PREFIX_SEVERITY = {"E": "error", "W": "warning", "I": "info"}


@dataclass(frozen=True)
class SourceLocation:
    """1-based position of a token or element inside a document file."""

    file: str
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"line and column are 1-based: {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """A coded finding. Severity is implied by the code prefix (Exxx/Wxxx/Ixxx)."""

    code: str
    severity: str
    message: str
    location: SourceLocation | None = None
    element: str | None = None
    related: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        expected = _PREFIX_SEVERITY.get(self.code[:1])
        if expected != self.severity:
            raise ValueError(f"code {self.code} does not match severity {self.severity}")

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def sort_key(self) -> tuple:
        loc = self.location
        return (
            loc.file if loc else "",
            loc.line if loc else 0,
            loc.column if loc else 0,
            self.code,
            self.element or "",
            self.message,
        )

    def to_json(self) -> dict:
        related = list(self.related)
        if self.element and self.element not in related:
            related.insert(0, self.element)
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "file": self.location.file if self.location else None,
            "line": self.location.line if self.location else None,
            "column": self.location.column if self.location else None,
            "related": related,
        }

    def render(self) -> str:
        where = str(self.location) if self.location else (self.element or "<workspace>")
        return f"{where}: {self.code} {self.severity}: {self.message}"


def diagnostic(
    code: str,
    message: str,
    location: SourceLocation | None = None,
    element: str | None = None,
    related: tuple[str, ...] = (),
) -> Diagnostic:
    """Build a Diagnostic with the severity derived from the code prefix."""
    severity = _PREFIX_SEVERITY.get(code[:1])
    if severity is None:
        raise ValueError(f"diagnostic code must start with E, W or I: {code}")
    return Diagnostic(code, severity, message, location, element, related)


def sort_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


class SafError(Exception):
    """Operation-level failure carrying a diagnostic code (e.g. E300, E501)."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True)
class ParseResult:
    """Outcome of parsing one document: the document iff no error diagnostics."""

    document: object | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.document is not None

    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]
