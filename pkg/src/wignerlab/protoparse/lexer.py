"""Tokeniser for .wig protocol files."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        # statements
        "register", "state", "basis", "unitary", "premeasure", "decohere", "undo",
        "apply", "measure", "discard", "assert",
        # clauses
        "in", "into", "on", "over", "as", "strength", "partial", "tol", "labels",
        "reference", "qubit", "qutrit", "dim",
        # basis shorthands and assertion quantities
        "mub", "phase", "plane", "computational", "dressed", "prob", "corr", "fidelity",
    }
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    length: int = 1

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    span: Span

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: {self.severity}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT KW NUMBER IMAG KET OP EOF
    text: str
    span: Span
    value: object = None


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KET = re.compile(r"\|([0-9+\-,]+)>")
_OPS = ("==", "<=", ">=", "=", ";", ",", ":", "(", ")", "[", "]", "{", "}", "+", "-", "*", "/", "|")


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    """Split ``source`` into tokens; bad characters become diagnostics and are skipped."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, pos, n = 1, 0, 0, len(source)

    def span(start: int, end: int) -> Span:
        return Span(line, start - line_start + 1, max(end - start, 1))

    while pos < n:
        ch = source[pos]
        if ch == "\n":
            line, line_start = line + 1, pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if ch == "#":
            while pos < n and source[pos] != "\n":
                pos += 1
            continue
        m = _NUMBER.match(source, pos)
        if m and (ch.isdigit() or ch == "."):
            end = m.end()
            text = m.group(0)
            kind = "NUMBER"
            if end < n and source[end] == "i" and not (end + 1 < n and (source[end + 1].isalnum() or source[end + 1] == "_")):
                kind, end = "IMAG", end + 1
            elif end < n and (source[end].isalpha() or source[end] == "_"):
                tail = _IDENT.match(source, end)
                end = tail.end() if tail else end + 1
                diags.append(Diagnostic("error", f"malformed number {source[pos:end]!r}", span(pos, end)))
                pos = end
                continue
            value = float(text)
            if not math.isfinite(value):
                diags.append(Diagnostic("error", f"number {text!r} is out of range", span(pos, end)))
                value = 0.0
            tokens.append(Token(kind, source[pos:end], span(pos, end), value))
            pos = end
            continue
        m = _IDENT.match(source, pos)
        if m:
            text = m.group(0)
            tokens.append(Token("KW" if text in KEYWORDS else "IDENT", text, span(pos, m.end()), text))
            pos = m.end()
            continue
        if ch == "|":
            m = _KET.match(source, pos)
            if m:
                tokens.append(Token("KET", m.group(0), span(pos, m.end()), m.group(1)))
                pos = m.end()
                continue
        for op in _OPS:
            if source.startswith(op, pos):
                tokens.append(Token("OP", op, span(pos, pos + len(op)), op))
                pos += len(op)
                break
        else:
            shown = ch if ch.isprintable() else f"\\x{ord(ch):02x}"
            diags.append(Diagnostic("error", f"unexpected character {shown!r}", span(pos, pos + 1)))
            pos += 1
    tokens.append(Token("EOF", "", Span(line, pos - line_start + 1, 1)))
    return tokens, diags
