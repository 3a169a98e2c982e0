"""Syntax tree of a protocol program.

Every node carries a source span that does not take part in equality, so
two trees compare equal when they describe the same program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .lexer import Span

Label = Union[int, str]


def _span():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# constant expressions


@dataclass(frozen=True)
class Num:
    value: float
    span: Span | None = _span()


@dataclass(frozen=True)
class Imag:
    value: float
    span: Span | None = _span()


@dataclass(frozen=True)
class Name:
    name: str  # pi or i
    span: Span | None = _span()


@dataclass(frozen=True)
class Ket:
    content: str
    span: Span | None = _span()


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    span: Span | None = _span()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span | None = _span()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span | None = _span()


Expr = Union[Num, Imag, Name, Ket, Call, Neg, BinOp]


# ---------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class RegisterDecl:
    name: str
    dim: int
    span: Span | None = _span()


@dataclass(frozen=True)
class StateDecl:
    name: str
    expr: Expr
    registers: tuple[str, ...]
    reference: bool = False  # True: named target only, does not prepare its registers
    span: Span | None = _span()


@dataclass(frozen=True)
class BasisEntry:
    label: Label
    expr: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class BasisDecl:
    name: str
    registers: tuple[str, ...]
    kind: str  # explicit | mub | phase | plane | computational | dressed
    entries: tuple[BasisEntry, ...] = ()
    arg: Expr | None = None
    refs: tuple[str, ...] = ()  # dressed(P, W)
    labels: tuple[Label, ...] | None = None
    partial: bool = False
    span: Span | None = _span()


@dataclass(frozen=True)
class UnitaryDecl:
    name: str
    rows: tuple[tuple[Expr, ...], ...]
    span: Span | None = _span()


# ---------------------------------------------------------------------------
# steps


@dataclass(frozen=True)
class Premeasure:
    system: str
    basis: str
    ancillas: tuple[str, ...]
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Decohere:
    registers: tuple[str, ...]
    basis: str
    strength: Expr | None = None
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Undo:
    system: str
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Apply:
    unitary: str
    registers: tuple[str, ...]
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Measure:
    registers: tuple[str, ...]
    basis: str
    name: str
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Discard:
    register: str
    agent: str | None = None
    span: Span | None = _span()


@dataclass(frozen=True)
class Event:
    name: str
    label: Label
    span: Span | None = _span()


@dataclass(frozen=True)
class Prob:
    events: tuple[Event, ...]
    given: tuple[Event, ...] = ()
    span: Span | None = _span()


@dataclass(frozen=True)
class Corr:
    names: tuple[str, ...]
    span: Span | None = _span()


@dataclass(frozen=True)
class Fidelity:
    state: str
    given: tuple[Event, ...] = ()
    span: Span | None = _span()


@dataclass(frozen=True)
class Assert:
    quantity: Union[Prob, Corr, Fidelity]
    relation: str
    expected: Expr
    tol: Expr
    agent: str | None = None
    span: Span | None = _span()


Declaration = Union[RegisterDecl, StateDecl, BasisDecl, UnitaryDecl]
Step = Union[Premeasure, Decohere, Undo, Apply, Measure, Discard, Assert]


@dataclass(frozen=True)
class ProtocolAST:
    statements: tuple
    source_name: str = field(default="<input>", compare=False)

    def _of(self, *kinds) -> list:
        return [s for s in self.statements if isinstance(s, kinds)]

    @property
    def registers(self) -> list[RegisterDecl]:
        return self._of(RegisterDecl)

    @property
    def states(self) -> list[StateDecl]:
        return self._of(StateDecl)

    @property
    def bases(self) -> list[BasisDecl]:
        return self._of(BasisDecl)

    @property
    def unitaries(self) -> list[UnitaryDecl]:
        return self._of(UnitaryDecl)

    @property
    def declarations(self) -> list:
        return self._of(RegisterDecl, StateDecl, BasisDecl, UnitaryDecl)

    @property
    def steps(self) -> list:
        return self._of(Premeasure, Decohere, Undo, Apply, Measure, Discard)

    @property
    def assertions(self) -> list[Assert]:
        return self._of(Assert)

    def count(self, kind) -> int:
        return len(self._of(kind))
