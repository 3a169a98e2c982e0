"""Canonical source text for a syntax tree; parsing the output gives the same tree."""

from __future__ import annotations

from .nodes import (
    Apply,
    Assert,
    BasisDecl,
    BinOp,
    Call,
    Corr,
    Decohere,
    Discard,
    Event,
    Fidelity,
    Imag,
    Ket,
    Measure,
    Name,
    Neg,
    Num,
    Premeasure,
    Prob,
    ProtocolAST,
    RegisterDecl,
    StateDecl,
    Undo,
    UnitaryDecl,
)


def format_expr(e) -> str:
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Imag):
        return repr(float(e.value)) + "i"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Ket):
        return f"|{e.content}>"
    if isinstance(e, Call):
        return f"{e.func}({format_expr(e.arg)})"
    if isinstance(e, Neg):
        return f"(-{format_expr(e.operand)})"
    if isinstance(e, BinOp):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    raise TypeError(f"not an expression node: {e!r}")


def format_label(label) -> str:
    return str(label)


def _events(events) -> str:
    return ", ".join(f"{ev.name}={format_label(ev.label)}" for ev in events)


def _labels(labels) -> str:
    return "" if labels is None else f" labels({', '.join(format_label(x) for x in labels)})"


def format_quantity(q) -> str:
    if isinstance(q, Prob):
        given = f" | {_events(q.given)}" if q.given else ""
        return f"prob({_events(q.events)}{given})"
    if isinstance(q, Corr):
        return f"corr({', '.join(q.names)})"
    if isinstance(q, Fidelity):
        given = f" | {_events(q.given)}" if q.given else ""
        return f"fidelity({q.state}{given})"
    raise TypeError(f"not an assertion quantity: {q!r}")


def format_statement(s) -> str:
    prefix = f"{s.agent}: " if getattr(s, "agent", None) else ""
    if isinstance(s, RegisterDecl):
        kind = {2: "qubit", 3: "qutrit"}.get(s.dim, f"dim {s.dim}")
        return f"register {s.name} {kind};"
    if isinstance(s, StateDecl):
        ref = " reference" if s.reference else ""
        return f"state {s.name} = {format_expr(s.expr)} on {', '.join(s.registers)}{ref};"
    if isinstance(s, BasisDecl):
        head = f"basis {s.name} over {', '.join(s.registers)}"
        if s.kind == "explicit":
            part = " partial" if s.partial else ""
            body = ", ".join(f"{format_label(e.label)}: {format_expr(e.expr)}" for e in s.entries)
            return f"{head}{part} = {{{body}}};"
        if s.kind == "computational":
            return f"{head} = computational{_labels(s.labels)};"
        if s.kind == "dressed":
            return f"{head} = dressed({s.refs[0]}, {s.refs[1]});"
        return f"{head} = {s.kind}({format_expr(s.arg)}){_labels(s.labels)};"
    if isinstance(s, UnitaryDecl):
        rows = ", ".join("[" + ", ".join(format_expr(x) for x in row) + "]" for row in s.rows)
        return f"unitary {s.name} = [{rows}];"
    if isinstance(s, Premeasure):
        return f"{prefix}premeasure {s.system} in {s.basis} into {', '.join(s.ancillas)};"
    if isinstance(s, Decohere):
        strength = f" strength {format_expr(s.strength)}" if s.strength is not None else ""
        return f"{prefix}decohere {', '.join(s.registers)} in {s.basis}{strength};"
    if isinstance(s, Undo):
        return f"{prefix}undo {s.system};"
    if isinstance(s, Apply):
        return f"{prefix}apply {s.unitary} on {', '.join(s.registers)};"
    if isinstance(s, Measure):
        return f"{prefix}measure {', '.join(s.registers)} in {s.basis} as {s.name};"
    if isinstance(s, Discard):
        return f"{prefix}discard {s.register};"
    if isinstance(s, Assert):
        return (
            f"{prefix}assert {format_quantity(s.quantity)} {s.relation} "
            f"{format_expr(s.expected)} tol {format_expr(s.tol)};"
        )
    raise TypeError(f"not a statement node: {s!r}")


def format_program(ast: ProtocolAST) -> str:
    return "".join(format_statement(s) + "\n" for s in ast.statements)
