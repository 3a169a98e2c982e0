"""Recursive-descent parser with one token of lookahead."""

from __future__ import annotations

from pathlib import Path

from .lexer import Diagnostic, Span, Token, tokenize
from .nodes import (
    Apply,
    Assert,
    BasisDecl,
    BasisEntry,
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

FUNCTIONS = frozenset({"sqrt", "exp", "cos", "sin"})
CONSTANTS = frozenset({"pi", "i"})
MAX_DEPTH = 64
MAX_DIM_LITERAL = 1 << 20


class _Abort(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.diags: list[Diagnostic] = []
        # names are declared before use, so one pass resolves every reference
        self.symbols: dict[str, set] = {k: set() for k in ("register", "state", "basis", "unitary", "outcome")}
        self.measures = 0

    def declare(self, kind: str, tok: Token):
        if tok.text in self.symbols[kind]:
            self.diags.append(Diagnostic("error", f"{kind} {tok.text!r} is already declared", tok.span))
        self.symbols[kind].add(tok.text)

    def ref(self, kind: str) -> str:
        """A name that must already be declared as ``kind``; unknown names are reported, not fatal."""
        t = self.tok
        name = self.name(f"{kind} name")
        if name not in self.symbols[kind]:
            self.diags.append(Diagnostic("error", f"unknown {kind} {name!r}", t.span))
        return name

    def refs(self, kind: str = "register") -> tuple[str, ...]:
        out = [self.ref(kind)]
        while self.at_op(","):
            self.advance()
            out.append(self.ref(kind))
        return tuple(out)

    def new_name(self, kind: str) -> str:
        t = self.tok
        name = self.name(f"{kind} name")
        self.declare(kind, t)
        return name

    def in_basis(self) -> str:
        self.expect_kw("in")
        if self.at_kw("basis"):
            self.advance()
        return self.ref("basis")

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.tok
        raise _Abort(Diagnostic("error", message, t.span))

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "OP" and self.tok.text in ops

    def at_kw(self, *words) -> bool:
        return self.tok.kind == "KW" and self.tok.text in words

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            self.fail(f"expected {op!r}, found {self._describe(self.tok)}")
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail(f"expected {word!r}, found {self._describe(self.tok)}")
        return self.advance()

    def name(self, what: str = "name") -> str:
        if self.tok.kind != "IDENT":
            if self.tok.kind == "KW":
                self.fail(f"{self.tok.text!r} is a reserved word and cannot be used as a {what}")
            self.fail(f"expected {what}, found {self._describe(self.tok)}")
        return self.advance().text

    def names(self, what: str = "register") -> tuple[str, ...]:
        out = [self.name(what)]
        while self.at_op(","):
            self.advance()
            out.append(self.name(what))
        return tuple(out)

    @staticmethod
    def _describe(t: Token) -> str:
        return "end of input" if t.kind == "EOF" else repr(t.text)

    # -- program ------------------------------------------------------------

    def program(self, diags: list[Diagnostic]) -> tuple:
        self.diags = diags
        statements = []
        while self.tok.kind != "EOF":
            start = self.pos
            try:
                statements.append(self.statement())
            except _Abort as e:
                diags.append(e.diag)
                self.depth = 0
                self._synchronise(start)
        return tuple(statements)

    def _synchronise(self, start: int):
        if self.pos == start:
            self.advance()
        while self.tok.kind != "EOF" and not self.at_op(";"):
            self.advance()
        if self.at_op(";"):
            self.advance()

    def statement(self):
        first = self.tok
        agent = None
        if first.kind == "IDENT" and self.peek().kind == "OP" and self.peek().text == ":":
            agent = self.advance().text
            self.advance()
        t = self.tok
        if t.kind != "KW":
            self.fail(f"expected a statement, found {self._describe(t)}")
        handler = {
            "register": self.register_decl,
            "state": self.state_decl,
            "basis": self.basis_decl,
            "unitary": self.unitary_decl,
            "premeasure": self.premeasure,
            "decohere": self.decohere,
            "undo": self.undo,
            "apply": self.apply,
            "measure": self.measure,
            "discard": self.discard,
            "assert": self.assertion,
        }.get(t.text)
        if handler is None:
            self.fail(f"expected a statement, found {self._describe(t)}")
        if t.text in ("register", "state", "basis", "unitary"):
            if agent is not None:
                self.fail("only steps can carry an agent prefix", first)
            node = handler()
        else:
            node = handler(agent)
        self.expect_op(";")
        return node

    # -- declarations -------------------------------------------------------

    def register_decl(self):
        start = self.advance()
        name = self.new_name("register")
        if self.at_kw("qubit"):
            self.advance()
            dim = 2
        elif self.at_kw("qutrit"):
            self.advance()
            dim = 3
        elif self.at_kw("dim"):
            self.advance()
            dim = self.integer("dimension")
            if not 1 <= dim <= MAX_DIM_LITERAL:
                self.fail(f"register dimension {dim} is out of range")
        else:
            self.fail(f"expected 'qubit', 'qutrit' or 'dim', found {self._describe(self.tok)}")
        return RegisterDecl(name, dim, span=start.span)

    def integer(self, what: str) -> int:
        t = self.tok
        if t.kind != "NUMBER" or not t.text.isdigit():
            self.fail(f"expected an integer {what}, found {self._describe(t)}")
        self.advance()
        return int(t.text)

    def state_decl(self):
        start = self.advance()
        name = self.new_name("state")
        self.expect_op("=")
        expr = self.expr()
        self.expect_kw("on")
        regs = self.refs()
        reference = False
        if self.at_kw("reference"):
            self.advance()
            reference = True
        return StateDecl(name, expr, regs, reference, span=start.span)

    def basis_decl(self):
        start = self.advance()
        name = self.new_name("basis")
        self.expect_kw("over")
        regs = self.refs()
        partial = False
        if self.at_kw("partial"):
            self.advance()
            partial = True
        self.expect_op("=")
        t = self.tok
        if self.at_op("{"):
            self.advance()
            entries = [self.basis_entry()]
            while self.at_op(","):
                self.advance()
                if self.at_op("}"):
                    break
                entries.append(self.basis_entry())
            self.expect_op("}")
            return BasisDecl(name, regs, "explicit", tuple(entries), partial=partial, span=start.span)
        if partial:
            self.fail("'partial' applies only to explicitly listed bases", t)
        if self.at_kw("mub", "phase", "plane"):
            kind = self.advance().text
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return BasisDecl(name, regs, kind, arg=arg, labels=self.labels_clause(), span=start.span)
        if self.at_kw("computational"):
            self.advance()
            return BasisDecl(name, regs, "computational", labels=self.labels_clause(), span=start.span)
        if self.at_kw("dressed"):
            self.advance()
            self.expect_op("(")
            pre = self.ref("basis")
            self.expect_op(",")
            wig = self.ref("basis")
            self.expect_op(")")
            return BasisDecl(name, regs, "dressed", refs=(pre, wig), span=start.span)
        self.fail(f"expected '{{', mub, phase, plane, computational or dressed, found {self._describe(t)}")

    def labels_clause(self):
        if not self.at_kw("labels"):
            return None
        self.advance()
        self.expect_op("(")
        out = [self.label()]
        while self.at_op(","):
            self.advance()
            out.append(self.label())
        self.expect_op(")")
        return tuple(out)

    def label(self):
        t = self.tok
        if self.at_op("+", "-"):
            sign = self.advance().text
            if self.tok.kind == "NUMBER":
                n = self.integer("label")
                return -n if sign == "-" else n
            return sign
        if t.kind == "NUMBER":
            return self.integer("label")
        if t.kind == "IDENT":
            return self.advance().text
        self.fail(f"expected an outcome label, found {self._describe(t)}")

    def basis_entry(self) -> BasisEntry:
        t = self.tok
        label = self.label()
        self.expect_op(":")
        return BasisEntry(label, self.expr(), span=t.span)

    def unitary_decl(self):
        start = self.advance()
        name = self.new_name("unitary")
        self.expect_op("=")
        self.expect_op("[")
        rows = [self.row()]
        while self.at_op(","):
            self.advance()
            rows.append(self.row())
        self.expect_op("]")
        return UnitaryDecl(name, tuple(rows), span=start.span)

    def row(self) -> tuple:
        self.expect_op("[")
        out = [self.expr()]
        while self.at_op(","):
            self.advance()
            out.append(self.expr())
        self.expect_op("]")
        return tuple(out)

    # -- steps --------------------------------------------------------------

    def premeasure(self, agent=None):
        start = self.advance()
        system = self.ref("register")
        basis = self.in_basis()
        self.expect_kw("into")
        return Premeasure(system, basis, self.refs(), agent, span=start.span)

    def decohere(self, agent=None):
        start = self.advance()
        regs = self.refs()
        basis = self.in_basis()
        strength = None
        if self.at_kw("strength"):
            self.advance()
            strength = self.expr()
        return Decohere(regs, basis, strength, agent, span=start.span)

    def undo(self, agent=None):
        start = self.advance()
        return Undo(self.ref("register"), agent, span=start.span)

    def apply(self, agent=None):
        start = self.advance()
        u = self.ref("unitary")
        self.expect_kw("on")
        return Apply(u, self.refs(), agent, span=start.span)

    def measure(self, agent=None):
        start = self.advance()
        regs = self.refs()
        basis = self.in_basis()
        self.measures += 1
        if self.at_kw("as"):
            self.advance()
            name = self.new_name("outcome")
        else:
            name = f"m{self.measures}"
            self.declare("outcome", Token("IDENT", name, start.span))
        return Measure(regs, basis, name, agent, span=start.span)

    def discard(self, agent=None):
        start = self.advance()
        return Discard(self.ref("register"), agent, span=start.span)

    def assertion(self, agent=None):
        start = self.advance()
        quantity = self.quantity()
        if not self.at_op("==", "<=", ">="):
            self.fail(f"expected '==', '<=' or '>=', found {self._describe(self.tok)}")
        relation = self.advance().text
        expected = self.expr()
        if not self.at_kw("tol"):
            self.fail("assertions need an explicit tolerance: expected 'tol'")
        self.advance()
        tol = self.expr()
        return Assert(quantity, relation, expected, tol, agent, span=start.span)

    def quantity(self):
        t = self.tok
        if self.at_kw("prob"):
            self.advance()
            self.expect_op("(")
            events = self.events()
            given = ()
            if self.at_op("|"):
                self.advance()
                given = self.events()
            self.expect_op(")")
            return Prob(events, given, span=t.span)
        if self.at_kw("corr"):
            self.advance()
            self.expect_op("(")
            names = self.refs("outcome")
            self.expect_op(")")
            return Corr(names, span=t.span)
        if self.at_kw("fidelity"):
            self.advance()
            self.expect_op("(")
            state = self.ref("state")
            given = ()
            if self.at_op("|"):
                self.advance()
                given = self.events()
            self.expect_op(")")
            return Fidelity(state, given, span=t.span)
        self.fail(f"expected prob, corr or fidelity, found {self._describe(t)}")

    def events(self) -> tuple:
        out = [self.event()]
        while self.at_op(","):
            self.advance()
            out.append(self.event())
        return tuple(out)

    def event(self) -> Event:
        t = self.tok
        name = self.ref("outcome")
        self.expect_op("=")
        return Event(name, self.label(), span=t.span)

    # -- expressions --------------------------------------------------------

    def expr(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail("expression nested too deeply")
        try:
            node = self.term()
            while self.at_op("+", "-"):
                op = self.advance()
                node = BinOp(op.text, node, self.term(), span=op.span)
            return node
        finally:
            self.depth -= 1

    def term(self):
        node = self.unary()
        while True:
            if self.at_op("*", "/"):
                op = self.advance()
                node = BinOp(op.text, node, self.unary(), span=op.span)
            elif self.tok.kind == "KET":
                # juxtaposition: coefficient followed by a ket
                node = BinOp("*", node, self.unary(), span=self.tok.span)
            else:
                return node

    def unary(self):
        if self.at_op("-", "+"):
            op = self.advance()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.fail("expression nested too deeply")
            try:
                inner = self.unary()
            finally:
                self.depth -= 1
            return Neg(inner, span=op.span) if op.text == "-" else inner
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            return Num(float(t.value), span=t.span)
        if t.kind == "IMAG":
            self.advance()
            return Imag(float(t.value), span=t.span)
        if t.kind == "KET":
            self.advance()
            return Ket(t.value, span=t.span)
        if t.kind == "IDENT":
            self.advance()
            if self.at_op("("):
                if t.text not in FUNCTIONS:
                    self.fail(f"unknown function {t.text!r} (known: {', '.join(sorted(FUNCTIONS))})", t)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(t.text, arg, span=t.span)
            if t.text not in CONSTANTS:
                self.fail(f"unknown constant {t.text!r} in expression (known: i, pi)", t)
            return Name(t.text, span=t.span)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(f"malformed expression: unexpected {self._describe(t)}")


def parse(source: str, source_name: str = "<input>"):
    """Parse program text; returns a ProtocolAST, or a list of Diagnostics on failure."""
    tokens, diags = tokenize(source)
    statements = Parser(tokens).program(diags)
    if any(d.is_error for d in diags):
        return sorted(diags, key=lambda d: (d.span.line, d.span.col))
    return ProtocolAST(statements, source_name)


def parse_file(path):
    p = Path(path)
    try:
        text = p.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        return [Diagnostic("error", f"file is not valid UTF-8 ({e.reason})", Span(1, 1, 1))]
    return parse(text, str(p))
