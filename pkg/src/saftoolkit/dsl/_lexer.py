"""Tokenizer shared by the .saf block-document parsers (dm, kpi, arch)."""

from __future__ import annotations

from dataclasses import dataclass

from ..diagnostics import Diagnostic, SourceLocation, diagnostic
from ..model import is_identifier

PUNCT = ("->", "<=", ">=", "{", "}", ".", "|", "<", ">")

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | string | number | punct | eof
    value: str
    location: SourceLocation


class LexResult:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]):
        self.tokens = tokens
        self.diagnostics = diagnostics


def tokenize(text: str, file: str) -> LexResult:
    """Tokenize a .saf document; lexical failures become E100 diagnostics."""
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    line, col, i = 1, 1, 0
    length = len(text)

    def loc() -> SourceLocation:
        return SourceLocation(file, line, col)

    while i < length:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < length and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start = loc()
            i += 1
            col += 1
            buf: list[str] = []
            closed = False
            while i < length:
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                if c == "\n":
                    break
                if c == "\\" and i + 1 < length:
                    esc = text[i + 1]
                    buf.append(_ESCAPES.get(esc, esc))
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                diagnostics.append(diagnostic("E100", "unterminated string literal", start))
                return LexResult(tokens, diagnostics)
            tokens.append(Token("string", "".join(buf), start))
            continue
        matched_punct = None
        for punct in PUNCT:
            if text.startswith(punct, i):
                matched_punct = punct
                break
        if matched_punct:
            tokens.append(Token("punct", matched_punct, loc()))
            i += len(matched_punct)
            col += len(matched_punct)
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < length and text[i + 1].isdigit()):
            start = loc()
            j = i + 1
            while j < length and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append(Token("number", text[i:j], start))
            col += j - i
            i = j
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            start = loc()
            j = i
            while j < length and text[j].isascii() and (text[j].isalnum() or text[j] in "_-"):
                if text[j] == "-" and j + 1 < length and text[j + 1] == ">":
                    break  # keep '->' lexable without surrounding spaces
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            if not is_identifier(word):
                diagnostics.append(
                    diagnostic("E100", f"invalid identifier {word!r} (lowercase slug expected)", start)
                )
                return LexResult(tokens, diagnostics)
            tokens.append(Token("ident", word, start))
            continue
        diagnostics.append(diagnostic("E100", f"unexpected character {ch!r}", loc()))
        return LexResult(tokens, diagnostics)

    tokens.append(Token("eof", "", loc()))
    return LexResult(tokens, diagnostics)


class TokenCursor:
    """Cursor over a token list with expect/accept helpers used by the parsers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at_end(self) -> bool:
        return self.current.kind == "eof"

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, kind: str, value: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (value is None or tok.value == value)

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        if self.check(kind, value):
            return self.advance()
        return None

    def error(self, code: str, message: str, location: SourceLocation | None = None) -> None:
        self.diagnostics.append(
            diagnostic(code, message, location or self.current.location)
        )

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token | None:
        if self.check(kind, value):
            return self.advance()
        expected = what or (value if value is not None else kind)
        found = self.current.value or self.current.kind
        self.error("E100", f"expected {expected}, found {found!r}")
        return None

    def expect_ident(self, what: str) -> Token | None:
        return self.expect("ident", None, what)

    def expect_string(self, what: str) -> Token | None:
        return self.expect("string", None, what)

    def skip_to_keywords(self, keywords: set[str]) -> None:
        """Error recovery: skip tokens until a top-level keyword or '}'."""
        depth = 0
        while not self.at_end():
            tok = self.current
            if depth == 0 and (
                (tok.kind == "ident" and tok.value in keywords)
                or (tok.kind == "punct" and tok.value == "}")
            ):
                return
            if tok.kind == "punct" and tok.value == "{":
                depth += 1
            elif tok.kind == "punct" and tok.value == "}":
                depth -= 1
            self.advance()
