"""Static checks and resolution of a parsed protocol.

``compile_program`` walks the statements once, evaluating constant
expressions, building bases and unitaries, and tracking each register's
lifecycle.  Problems become diagnostics; nothing is thrown.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .. import meas
from ..qcore import OUTSIDE, Basis, Register, gram_deviation
from .lexer import Diagnostic, Span
from .nodes import (
    Apply,
    Assert,
    BasisDecl,
    BinOp,
    Call,
    Corr,
    Decohere,
    Discard,
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

ORTHO_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
# total Hilbert-space dimension a program may declare
MAX_TOTAL_DIM = 4096

_FUNCS = {"sqrt": cmath.sqrt, "exp": cmath.exp, "cos": cmath.cos, "sin": cmath.sin}
_NOWHERE = Span(1, 1, 1)


class EvalError(Exception):
    def __init__(self, message: str, span: Span | None):
        super().__init__(message)
        self.span = span


# ---------------------------------------------------------------------------
# constant expressions


def _single_ket(symbol: str, dim: int, span) -> np.ndarray:
    if symbol in ("+", "-"):
        if dim != 2:
            raise EvalError(f"|{symbol}> needs a qubit register, got dimension {dim}", span)
        return np.array([1.0, 1.0 if symbol == "+" else -1.0], dtype=complex) / math.sqrt(2)
    if not symbol.isdigit():
        raise EvalError(f"bad ket symbol {symbol!r}", span)
    k = int(symbol)
    if k >= dim:
        raise EvalError(f"ket index {k} is out of range for dimension {dim}", span)
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def ket_vector(content: str, dims: tuple[int, ...], span=None) -> np.ndarray:
    """``|0>``, ``|01>``, ``|+0>`` or ``|2,0>`` on registers of dimensions ``dims``."""
    if dims is None:
        raise EvalError("a ket is not allowed here", span)
    parts = content.split(",") if "," in content else list(content)
    if len(parts) != len(dims):
        raise EvalError(f"ket |{content}> has {len(parts)} entries for {len(dims)} registers", span)
    out = np.ones(1, dtype=complex)
    for sym, d in zip(parts, dims):
        out = np.kron(out, _single_ket(sym, d, span))
    return out


def evaluate(e, dims: tuple[int, ...] | None = None):
    """Value of a constant expression: a complex number, or a vector when kets appear."""
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Imag):
        return complex(0.0, e.value)
    if isinstance(e, Name):
        return complex(math.pi) if e.name == "pi" else 1j
    if isinstance(e, Ket):
        return ket_vector(e.content, dims, e.span)
    if isinstance(e, Call):
        x = evaluate(e.arg, dims)
        if isinstance(x, np.ndarray):
            raise EvalError(f"{e.func} cannot take a ket", e.span)
        try:
            out = _FUNCS[e.func](x)
        except (OverflowError, ValueError) as err:
            raise EvalError(f"{e.func} failed: {err}", e.span) from None
        return _finite(out, e.span)
    if isinstance(e, Neg):
        return -evaluate(e.operand, dims)
    if isinstance(e, BinOp):
        a, b = evaluate(e.left, dims), evaluate(e.right, dims)
        va, vb = isinstance(a, np.ndarray), isinstance(b, np.ndarray)
        try:
            if e.op in "+-":
                if va != vb:
                    raise EvalError("cannot add a number to a ket", e.span)
                out = a + b if e.op == "+" else a - b
            elif e.op == "*":
                if va and vb:
                    raise EvalError("cannot multiply two kets", e.span)
                out = a * b
            else:
                if vb:
                    raise EvalError("cannot divide by a ket", e.span)
                if b == 0:
                    raise EvalError("division by zero", e.span)
                out = a / b
        except (OverflowError, FloatingPointError) as err:
            raise EvalError(f"arithmetic overflow: {err}", e.span) from None
        return _finite(out, e.span)
    raise EvalError(f"not an expression: {type(e).__name__}", getattr(e, "span", None))


def _finite(x, span):
    ok = np.all(np.isfinite(x)) if isinstance(x, np.ndarray) else cmath.isfinite(x)
    if not ok:
        raise EvalError("expression is not finite", span)
    return x


def real_value(e, what: str, imag_tol: float = 1e-12) -> float:
    v = evaluate(e)
    if isinstance(v, np.ndarray):
        raise EvalError(f"{what} must be a number, not a ket", e.span)
    if abs(v.imag) > imag_tol:
        raise EvalError(f"{what} must be real, got {v:.6g}", e.span)
    return float(v.real)


# ---------------------------------------------------------------------------
# resolved program


@dataclass
class BasisInfo:
    basis: Basis
    dims: tuple[int, ...]


@dataclass
class StateInfo:
    vector: np.ndarray
    registers: tuple[str, ...]
    reference: bool


@dataclass
class MeasureInfo:
    basis: Basis
    labels: tuple  # possible outcomes, OUTSIDE included for partial bases


@dataclass
class Plan:
    ast: ProtocolAST
    registers: dict = field(default_factory=dict)  # name -> Register, declaration order
    states: dict = field(default_factory=dict)
    bases: dict = field(default_factory=dict)
    unitaries: dict = field(default_factory=dict)
    outcomes: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)  # (node, resolved payload)
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


class _Compiler:
    def __init__(self, ast: ProtocolAST):
        self.plan = Plan(ast)
        self.prepared: set = set()
        self.touched: set = set()
        self.decohered: set = set()
        self.discarded: set = set()
        self.records: dict = {}  # system -> stack of (basis, ancillas)

    # -- reporting ----------------------------------------------------------

    def error(self, message: str, span):
        self.plan.diagnostics.append(Diagnostic("error", message, span or _NOWHERE))

    def warning(self, message: str, span):
        self.plan.diagnostics.append(Diagnostic("warning", message, span or _NOWHERE))

    # -- lookups ------------------------------------------------------------

    def regs(self, names, span, allow_discarded: bool = False):
        out = []
        for n in names:
            r = self.plan.registers.get(n)
            if r is None:
                self.error(f"unknown register {n!r}", span)
                return None
            if n in self.discarded and not allow_discarded:
                self.error(f"register {n!r} was traced out (discarded) and cannot be used", span)
                return None
            out.append(r)
        if len(set(names)) != len(names):
            self.error(f"register listed twice in {', '.join(names)}", span)
            return None
        return out

    def lookup(self, table: str, name: str, span):
        item = getattr(self.plan, table).get(name)
        if item is None:
            kind = {"bases": "basis", "unitaries": "unitary", "states": "state", "outcomes": "outcome"}[table]
            self.error(f"unknown {kind} {name!r}", span)
        return item

    def basis_for(self, name: str, regs, span, complete: bool = False):
        info = self.lookup("bases", name, span)
        if info is None or regs is None:
            return None
        dims = tuple(r.dim for r in regs)
        if info.dims != dims:
            self.error(f"basis {name!r} spans dimensions {info.dims} but the registers have {dims}", span)
            return None
        if complete and info.basis.partial:
            self.error(f"basis {name!r} is partial; this step needs a complete basis", span)
            return None
        return info.basis

    # -- statements ---------------------------------------------------------

    def run(self):
        total = 1
        for s in self.plan.ast.statements:
            try:
                handler = getattr(self, "on_" + type(s).__name__)
            except AttributeError:
                self.error(f"unsupported statement {type(s).__name__}", getattr(s, "span", None))
                continue
            try:
                handler(s)
            except EvalError as e:
                self.error(str(e), e.span or s.span)
            if isinstance(s, RegisterDecl) and s.name in self.plan.registers:
                total *= s.dim
                if total > MAX_TOTAL_DIM:
                    self.error(
                        f"total state dimension {total} exceeds the limit of {MAX_TOTAL_DIM}", s.span
                    )
                    total = 1
        return self.plan

    def on_RegisterDecl(self, s: RegisterDecl):
        if s.name in self.plan.registers:
            self.error(f"register {s.name!r} is already declared", s.span)
            return
        if s.dim < 1:
            self.error("register dimension must be at least 1", s.span)
            return
        self.plan.registers[s.name] = Register(s.name, s.dim)

    def on_StateDecl(self, s: StateDecl):
        regs = self.regs(s.registers, s.span)
        if regs is None:
            return
        if s.name in self.plan.states:
            self.error(f"state {s.name!r} is already declared", s.span)
            return
        v = evaluate(s.expr, tuple(r.dim for r in regs))
        if not isinstance(v, np.ndarray):
            raise EvalError(f"state {s.name!r} must be a combination of kets", s.expr.span or s.span)
        norm = float(np.linalg.norm(v))
        if norm < NORM_TOL:
            self.error(f"state {s.name!r} is the zero vector", s.span)
            return
        if abs(norm - 1.0) > NORM_TOL:
            self.warning(f"state {s.name!r} has norm {norm:.12g}; it is normalised", s.span)
        if not s.reference:
            for n in s.registers:
                if n in self.prepared:
                    self.error(f"register {n!r} is prepared by more than one state", s.span)
                    return
                if n in self.touched:
                    self.error(f"register {n!r} is prepared after a step has acted on it", s.span)
                    return
            self.prepared.update(s.registers)
        self.plan.states[s.name] = StateInfo(v / norm, tuple(s.registers), s.reference)

    def on_BasisDecl(self, s: BasisDecl):
        regs = self.regs(s.registers, s.span)
        if regs is None:
            return
        if s.name in self.plan.bases:
            self.error(f"basis {s.name!r} is already declared", s.span)
            return
        dims = tuple(r.dim for r in regs)
        d = int(np.prod(dims))
        basis = self._build_basis(s, regs, dims, d)
        if basis is not None:
            self.plan.bases[s.name] = BasisInfo(basis, dims)

    def _labels(self, s: BasisDecl, default: tuple):
        labels = default if s.labels is None else tuple(s.labels)
        if len(labels) != len(default):
            self.error(f"basis {s.name!r} needs {len(default)} labels, {len(labels)} given", s.span)
            return None
        return labels

    def _build_basis(self, s: BasisDecl, regs, dims, d):
        if s.kind in ("mub", "phase", "plane"):
            if dims != (2,):
                self.error(f"{s.kind}(...) bases act on a single qubit register", s.span)
                return None
            x = real_value(s.arg, f"{s.kind} argument")
            if s.kind == "mub":
                if x not in (1.0, 2.0, 3.0):
                    self.error(f"mub index must be 1, 2 or 3, got {x:g}", s.arg.span or s.span)
                    return None
                b = meas.mub_basis(int(x))
            elif s.kind == "phase":
                b = meas.phase_basis(x)
            else:
                b = meas.plane_basis(x)
            labels = self._labels(s, b.labels)
            return None if labels is None else Basis(b.vectors, labels)
        if s.kind == "computational":
            labels = self._labels(s, tuple(range(d)))
            return None if labels is None else Basis(np.eye(d), labels)
        if s.kind == "dressed":
            pre, wig = (self.lookup("bases", n, s.span) for n in s.refs)
            if pre is None or wig is None:
                return None
            system, friends = regs[0], regs[1:]
            if pre.dims != (system.dim,) or wig.dims != (system.dim,):
                self.error(
                    f"dressed({s.refs[0]}, {s.refs[1]}) needs both bases on the first register {system.label!r}",
                    s.span,
                )
                return None
            if not friends:
                self.error("a dressed basis needs at least one friend register after the system", s.span)
                return None
            try:
                return meas.dressed_basis(system, friends, pre.basis, wig.basis)
            except ValueError as e:
                self.error(f"dressed basis {s.name!r}: {e}", s.span)
                return None
        # explicit vectors
        labels = [e.label for e in s.entries]
        if OUTSIDE in labels:
            self.error(f"{OUTSIDE!r} is a reserved outcome label", s.span)
            return None
        if len(set(labels)) != len(labels):
            self.error(f"basis {s.name!r} repeats an outcome label", s.span)
            return None
        vecs = []
        for e in s.entries:
            v = evaluate(e.expr, dims)
            if not isinstance(v, np.ndarray):
                raise EvalError(f"basis vector {e.label!r} must be a combination of kets", e.span)
            vecs.append(v)
        vecs = np.array(vecs)
        dev = gram_deviation(vecs)
        if dev > ORTHO_TOL:
            self.error(f"basis {s.name!r} is not orthonormal (Gram-matrix deviation {dev:.3g})", s.span)
            return None
        if len(vecs) > d:
            self.error(f"basis {s.name!r} has {len(vecs)} vectors in dimension {d}", s.span)
            return None
        if len(vecs) < d and not s.partial:
            self.error(
                f"basis {s.name!r} has {len(vecs)} vectors for dimension {d}; declare it partial", s.span
            )
            return None
        return Basis(vecs, tuple(labels), partial=len(vecs) < d)

    def on_UnitaryDecl(self, s: UnitaryDecl):
        if s.name in self.plan.unitaries:
            self.error(f"unitary {s.name!r} is already declared", s.span)
            return
        n = len(s.rows)
        if any(len(r) != n for r in s.rows):
            self.error(f"unitary {s.name!r} must be a square matrix", s.span)
            return
        m = np.empty((n, n), dtype=complex)
        for i, row in enumerate(s.rows):
            for j, x in enumerate(row):
                v = evaluate(x)
                if isinstance(v, np.ndarray):
                    raise EvalError("matrix entries must be numbers", x.span or s.span)
                m[i, j] = v
        dev = float(np.max(np.abs(m.conj().T @ m - np.eye(n))))
        if dev > UNITARY_TOL:
            self.error(f"matrix {s.name!r} is not unitary (deviation {dev:.3g})", s.span)
            return
        self.plan.unitaries[s.name] = m

    def on_Premeasure(self, s: Premeasure):
        regs = self.regs((s.system,) + tuple(s.ancillas), s.span)
        if regs is None:
            return
        system, ancillas = regs[0], regs[1:]
        basis = self.basis_for(s.basis, [system], s.span, complete=True)
        if basis is None:
            return
        for a in ancillas:
            if a.dim != basis.size:
                self.error(
                    f"ancilla {a.label!r} has dimension {a.dim}; basis {s.basis!r} has {basis.size} outcomes",
                    s.span,
                )
                return
            if a.label in self.prepared or a.label in self.touched:
                self.error(f"ancilla {a.label!r} is not fresh; pre-measurement needs an untouched register", s.span)
                return
        self.touched.update(r.label for r in regs)
        self.records.setdefault(s.system, []).append((basis, tuple(s.ancillas)))
        self.plan.steps.append((s, (basis,)))

    def on_Decohere(self, s: Decohere):
        regs = self.regs(s.registers, s.span)
        basis = self.basis_for(s.basis, regs, s.span, complete=True) if regs else None
        if basis is None:
            return
        strength = 1.0
        if s.strength is not None:
            strength = real_value(s.strength, "decoherence strength")
            if not 0.0 <= strength <= 1.0:
                self.error(f"decoherence strength must lie in [0, 1], got {strength:g}", s.span)
                return
        self.touched.update(s.registers)
        self.decohered.update(s.registers)
        self.plan.steps.append((s, (basis, strength)))

    def on_Undo(self, s: Undo):
        if self.regs([s.system], s.span) is None:
            return
        stack = self.records.get(s.system)
        if not stack:
            self.error(f"nothing to undo: {s.system!r} has no pre-measurement", s.span)
            return
        basis, ancillas = stack[-1]
        involved = (s.system,) + ancillas
        lost = sorted(set(involved) & self.decohered)
        if lost:
            self.error(f"irreversible decoherence precedes undo: registers {', '.join(lost)}", s.span)
            return
        gone = sorted(set(involved) & self.discarded)
        if gone:
            self.error(f"cannot undo: registers {', '.join(gone)} were traced out", s.span)
            return
        stack.pop()
        self.plan.steps.append((s, (basis, ancillas)))

    def on_Apply(self, s: Apply):
        regs = self.regs(s.registers, s.span)
        u = self.lookup("unitaries", s.unitary, s.span)
        if regs is None or u is None:
            return
        d = int(np.prod([r.dim for r in regs]))
        if u.shape[0] != d:
            self.error(f"unitary {s.unitary!r} is {u.shape[0]}x{u.shape[0]}; registers have dimension {d}", s.span)
            return
        self.touched.update(s.registers)
        self.plan.steps.append((s, (u,)))

    def on_Measure(self, s: Measure):
        regs = self.regs(s.registers, s.span)
        basis = self.basis_for(s.basis, regs, s.span) if regs else None
        if basis is None:
            return
        if s.name in self.plan.outcomes:
            self.error(f"outcome name {s.name!r} is already used", s.span)
            return
        labels = tuple(basis.labels) + ((OUTSIDE,) if basis.partial else ())
        self.plan.outcomes[s.name] = MeasureInfo(basis, labels)
        self.touched.update(s.registers)
        self.plan.steps.append((s, (basis,)))

    def on_Discard(self, s: Discard):
        if self.regs([s.register], s.span) is None:
            return
        if len(self.plan.registers) - len(self.discarded) <= 1:
            self.error("cannot discard the last remaining register", s.span)
            return
        self.discarded.add(s.register)
        self.touched.add(s.register)
        self.plan.steps.append((s, ()))

    def _events(self, events, span) -> bool:
        seen = set()
        for ev in events:
            info = self.lookup("outcomes", ev.name, ev.span or span)
            if info is None:
                return False
            if ev.name in seen:
                self.error(f"outcome {ev.name!r} appears twice", ev.span or span)
                return False
            seen.add(ev.name)
            if ev.label not in info.labels:
                shown = ", ".join(str(x) for x in info.labels)
                self.error(f"{ev.label!r} is not an outcome of {ev.name!r} (outcomes: {shown})", ev.span or span)
                return False
        return True

    def on_Assert(self, s: Assert):
        q = s.quantity
        if isinstance(q, Prob):
            if not (self._events(q.events, s.span) and self._events(q.given, s.span)):
                return
        elif isinstance(q, Corr):
            if len(set(q.names)) != len(q.names):
                self.error("corr lists an outcome twice", s.span)
                return
            for n in q.names:
                info = self.lookup("outcomes", n, q.span or s.span)
                if info is None:
                    return
                if not all(isinstance(x, (int, float)) for x in info.basis.labels):
                    self.error(f"corr needs numeric outcome labels; {n!r} has {info.basis.labels}", s.span)
                    return
        elif isinstance(q, Fidelity):
            info = self.lookup("states", q.state, q.span or s.span)
            if info is None or not self._events(q.given, s.span):
                return
            if self.regs(info.registers, s.span) is None:
                return
        expected = real_value(s.expected, "expected value")
        tol = real_value(s.tol, "tolerance")
        if tol < 0:
            self.error(f"tolerance must be non-negative, got {tol:g}", s.tol.span or s.span)
            return
        self.plan.steps.append((s, (expected, tol)))


def compile_program(ast: ProtocolAST) -> Plan:
    return _Compiler(ast).run()


def validate(ast: ProtocolAST) -> list[Diagnostic]:
    """Every static problem in ``ast`` as diagnostics (errors and warnings)."""
    return compile_program(ast).diagnostics
