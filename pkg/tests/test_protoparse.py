import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerlab.protoparse import (
    Diagnostic,
    ProtocolAST,
    ProtocolError,
    execute,
    format_program,
    load,
    parse,
    shipped_programs,
    tokenize,
    validate,
)
from wignerlab.protoparse import nodes as n
from wignerlab.protoparse.semantics import EvalError, evaluate, ket_vector


def errors(source: str) -> list[str]:
    """Messages from parsing, then validating, ``source``."""
    ast = parse(source, "t.wig")
    diags = ast if isinstance(ast, list) else validate(ast)
    return [d.message for d in diags if d.is_error]


# -- lexer ------------------------------------------------------------------


def test_tokens_and_spans():
    toks, diags = tokenize("register a qubit;  # comment\nstate s = 2i*|0+> on a;")
    assert not diags
    kinds = [t.kind for t in toks]
    assert kinds[:4] == ["KW", "IDENT", "KW", "OP"]
    imag = next(t for t in toks if t.kind == "IMAG")
    assert imag.value == 2.0 and (imag.span.line, imag.span.col) == (2, 11)
    ket = next(t for t in toks if t.kind == "KET")
    assert ket.text == "|0+>"


def test_lexer_reports_bad_characters():
    _, diags = tokenize("register a qubit; $")
    assert diags and diags[0].span.col == 19


# -- parser -----------------------------------------------------------------


def test_fr_golden_counts():
    ast = load(shipped_programs()["fr"])
    assert ast.count(n.RegisterDecl) == 6
    assert ast.count(n.Premeasure) == 2
    assert ast.count(n.Measure) == 2
    assert len(ast.assertions) == 3
    assert [r.name for r in ast.registers] == ["g", "D_g", "F_g", "s", "D_s", "F_s"]


def test_unknown_basis_points_at_the_name():
    source = "register a qubit;\nmeasure a in x as o;\n"
    diags = parse(source, "t.wig")
    assert isinstance(diags, list) and len(diags) == 1
    d = diags[0]
    assert d.message == "unknown basis 'x'"
    assert (d.span.line, d.span.col, d.span.length) == (2, 14, 1)
    assert d.format("t.wig") == "t.wig:2:14: error: unknown basis 'x'"


def test_recovery_reports_several_errors():
    diags = parse("register a qubit;\nmeasure a in x as o;\nmeasure b in y as p;\n")
    assert [(d.span.line, d.message) for d in diags] == [
        (2, "unknown basis 'x'"),
        (3, "unknown register 'b'"),
        (3, "unknown basis 'y'"),
    ]


def test_optional_keywords():
    ast = parse("register a qubit; basis Z over a = computational; measure a in basis Z; measure a in Z;")
    names = [s.name for s in ast.steps]
    assert names == ["m1", "m2"]


def test_agent_prefix_and_labels():
    ast = parse("register a qubit; basis Z over a = computational labels(+1, -1); Bob: measure a in Z as o;")
    step = ast.steps[0]
    assert step.agent == "Bob"
    assert ast.bases[0].labels == (1, -1)


def test_deep_nesting_is_reported_not_crashed():
    diags = parse("register a qubit; state s = " + "(" * 500 + "1" + ")" * 500 + "|0> on a;")
    assert isinstance(diags, list) and "nest" in diags[0].message


@pytest.mark.parametrize(
    "source, message",
    [
        ("register a qubit; basis N over a = {0: |0>, 1: |0>};", "not orthonormal"),
        ("register a qubit; basis N over a = {0: |0>};", "declare it partial"),
        ("register a qubit; unitary U = [[1, 1], [0, 1]];", "not unitary"),
        ("register a dim 100000;", "exceeds the limit"),
        (
            "register a qubit; register b qubit; basis Z over a = computational;"
            " premeasure a in Z into b; decohere b in Z; undo a;",
            "irreversible decoherence precedes undo",
        ),
        ("register a qubit; register b qubit; basis Z over a = computational; undo a;", "undo"),
        ("register a qubit; state s = |2> on a;", "out of range"),
        ("register a qubit; basis P over a = phase(1/0);", "division by zero"),
        ("register a qubit; register b qubit; discard b; basis Z over a = computational; measure b in Z as o;", "discarded"),
    ],
)
def test_validation_errors(source, message):
    msgs = errors(source)
    assert any(message in m for m in msgs), msgs


def test_wrong_norm_is_a_warning():
    ast = parse("register a qubit; state s = |0> + |1> on a;")
    diags = validate(ast)
    assert diags and all(d.severity == "warning" for d in diags)


def test_wrong_expected_value_fails_the_run():
    # negative control: a false claim must produce a failing assertion
    source = load(shipped_programs()["fr"])
    text = format_program(source).replace("== (1.0 / 12.0)", "== (1.0 / 10.0)")
    assert "(1.0 / 10.0)" in text
    doc = execute(parse(text, "fr-wrong.wig"))
    assert not doc.passed
    assert len(doc.failures) == 1


def test_execute_refuses_invalid_program():
    with pytest.raises(ProtocolError) as info:
        execute(parse("register a qubit; register b qubit; basis Z over a = computational;"
                      " premeasure a in Z into b; decohere b in Z; undo a;"))
    assert info.value.diagnostics


# -- constant expressions ---------------------------------------------------


def test_evaluate_expressions():
    ast = parse("register a qubit; state s = (1 + i)/sqrt(2) * exp(i*pi) * |0> on a;")
    v = evaluate(ast.states[0].expr, (2,))
    assert abs(v[0] - (-(1 + 1j) / math.sqrt(2))) < 1e-15
    assert abs(ket_vector("+", (2,)) - [2**-0.5, 2**-0.5]).max() < 1e-15
    with pytest.raises(EvalError):
        ket_vector("01", (2,))


# -- printer round trip -------------------------------------------------------


def _num():
    return st.floats(0, 1e6, allow_nan=False).map(lambda x: n.Num(float(x)))


def _exprs():
    leaves = st.one_of(_num(), st.sampled_from([n.Name("pi"), n.Name("i")]), st.floats(0, 100).map(n.Imag))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(n.Neg, sub),
            st.builds(n.Call, st.sampled_from(["sqrt", "exp", "cos", "sin"]), sub),
            st.builds(n.BinOp, st.sampled_from(["+", "-", "*", "/"]), sub, sub),
        ),
        max_leaves=8,
    )


labels = st.one_of(st.integers(-50, 50), st.sampled_from(["+", "-", "H", "T", "ok"]))
names = st.sampled_from(["o1", "o2", "res", "Wg"])


@st.composite
def programs(draw):
    regs = [n.RegisterDecl(f"r{k}", draw(st.sampled_from([2, 3, 5]))) for k in range(draw(st.integers(1, 3)))]
    reg = regs[0].name
    expr = draw(_exprs())
    statements = list(regs)
    statements.append(n.StateDecl("psi", n.BinOp("*", expr, n.Ket("0")), (reg,), draw(st.booleans())))
    basis_labels = draw(st.one_of(st.none(), st.lists(labels, min_size=1, max_size=3, unique=True).map(tuple)))
    statements.append(n.BasisDecl("B", (reg,), "computational", labels=basis_labels))
    statements.append(n.BasisDecl("P", (reg,), "phase", arg=draw(_exprs())))
    entries = tuple(n.BasisEntry(lb, n.Ket("0")) for lb in draw(st.lists(labels, min_size=1, max_size=2, unique=True)))
    statements.append(n.BasisDecl("E", (reg,), "explicit", entries=entries, partial=draw(st.booleans())))
    agent = draw(st.one_of(st.none(), st.sampled_from(["Alice", "W_g"])))
    out = draw(names)
    statements.append(n.Measure((reg,), draw(st.sampled_from(["B", "P", "E"])), out, agent))
    event = n.Event(out, draw(labels))
    quantity = draw(st.sampled_from([n.Prob((event,)), n.Prob((event,), (event,)), n.Corr((out,))]))
    rel = draw(st.sampled_from(["==", "<=", ">="]))
    statements.append(n.Assert(quantity, rel, draw(_exprs()), n.Num(1e-9), agent))
    return ProtocolAST(tuple(statements))


@settings(max_examples=200, deadline=None)
@given(programs())
def test_print_parse_round_trip(ast):
    text = format_program(ast)
    back = parse(text)
    assert isinstance(back, ProtocolAST), [d.format() for d in back]
    assert back == ast
    assert format_program(back) == text


@pytest.mark.parametrize("name", sorted(shipped_programs()))
def test_shipped_programs_round_trip(name):
    ast = load(shipped_programs()[name])
    assert parse(format_program(ast)) == ast


# -- fuzz -------------------------------------------------------------------

VOCAB = (
    "register state basis unitary premeasure decohere undo apply measure discard assert "
    "prob corr fidelity in into as on over tol strength labels partial reference computational "
    "mub phase plane dressed qubit qutrit dim pi i sqrt exp cos sin "
    "a b g s F_g |0> |1> |+> |01> |0,2> 1 2.5 1e999 1e-3 3i ( ) [ ] { } , ; : = == <= >= + - * / |"
).split()


def _mutate(rng: random.Random, text: str) -> str:
    chars = list(text)
    for _ in range(rng.randint(1, 6)):
        op = rng.random()
        pos = rng.randrange(len(chars) + 1)
        if op < 0.3 and chars:
            del chars[min(pos, len(chars) - 1)]
        elif op < 0.6:
            chars.insert(pos, rng.choice(";:,()[]{}|<>=+-*/ \n#0123456789abcxyzi\x00é"))
        else:
            chars[pos:pos] = list(" " + rng.choice(VOCAB) + " ")
    return "".join(chars)


def fuzz_inputs(count: int, seed: int = 0):
    rng = random.Random(seed)
    corpus = [p.read_text() for p in shipped_programs().values()]
    for k in range(count):
        mode = k % 3
        if mode == 0:
            yield _mutate(rng, rng.choice(corpus))
        elif mode == 1:
            yield " ".join(rng.choice(VOCAB) for _ in range(rng.randint(0, 40)))
        else:
            yield "".join(chr(rng.randint(0, 0x2FF)) for _ in range(rng.randint(0, 80)))


def run_fuzz(count: int = 10_000) -> int:
    """Parse and validate ``count`` random inputs; returns the number of crashes."""
    crashes = 0
    for text in fuzz_inputs(count):
        try:
            ast = parse(text, "fuzz.wig")
            diags = ast if isinstance(ast, list) else validate(ast)
            assert all(isinstance(d, Diagnostic) for d in diags)
        except Exception:
            crashes += 1
    return crashes


def test_parser_fuzz_no_crash():
    for text in fuzz_inputs(10_000):
        ast = parse(text, "fuzz.wig")
        diags = ast if isinstance(ast, list) else validate(ast)
        for d in diags:
            assert isinstance(d, Diagnostic)
            assert d.span.line >= 1 and d.span.col >= 1
