"""The .wig scenario language: parse, validate, print and execute protocols."""

from importlib import resources

from .execute import ProtocolError, execute
from .lexer import Diagnostic, Span, tokenize
from .nodes import ProtocolAST
from .parser import parse, parse_file
from .printer import format_program
from .semantics import compile_program, validate


def shipped_programs() -> dict:
    """Name -> path of every .wig file bundled with the package."""
    root = resources.files("wignerlab") / "programs"
    return {p.name[: -len(".wig")]: p for p in sorted(root.iterdir(), key=lambda p: p.name) if p.name.endswith(".wig")}


def load(source) -> ProtocolAST:
    """Parse and validate a path; raises ProtocolError with the diagnostics on failure."""
    result = parse_file(source)
    if isinstance(result, list):
        raise ProtocolError(f"cannot parse {source}", result)
    errors = [d for d in validate(result) if d.is_error]
    if errors:
        raise ProtocolError(f"{len(errors)} error(s) in {source}", errors)
    return result


__all__ = [
    "Diagnostic",
    "ProtocolAST",
    "ProtocolError",
    "Span",
    "compile_program",
    "execute",
    "format_program",
    "load",
    "parse",
    "parse_file",
    "shipped_programs",
    "tokenize",
    "validate",
]
