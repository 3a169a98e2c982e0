"""Run a validated protocol over the branch ensemble of measurement records."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import meas
from ..qcore import (
    OUTSIDE,
    DensityOperator,
    FactoredDensity,
    StateVector,
    apply_unitary,
    as_factored,
    basis_state,
    fidelity,
    ket,
    partial_trace,
    project,
    reorder,
    tensor,
)
from ..reports import ReportDocument, check
from .nodes import Apply, Assert, Corr, Decohere, Discard, Fidelity, Measure, Premeasure, Prob, ProtocolAST, Undo
from .printer import format_quantity
from .semantics import compile_program

BRANCH_FLOOR = 1e-14
MAX_BRANCHES = 4096
LEAK_TOL = 1e-12


class ProtocolError(Exception):
    """Raised when a program with errors is executed, or a run exceeds its limits."""

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass
class Branch:
    outcomes: dict
    weight: float
    state: object


def _initial_state(plan):
    parts, covered = [], set()
    for name, info in plan.states.items():
        if info.reference:
            continue
        regs = [plan.registers[n] for n in info.registers]
        parts.append(ket(regs, info.vector))
        covered.update(info.registers)
    for name, reg in plan.registers.items():
        if name not in covered:
            parts.append(basis_state([reg], [0]))
    state = parts[0]
    for p in parts[1:]:
        state = tensor(state, p)
    return reorder(state, list(plan.registers))


def _trace_out(state, label: str) -> FactoredDensity:
    """Partial trace over one register, kept in factored form."""
    f = as_factored(state)
    axis = f.labels.index(label)
    r, dims = f.rank, f.dims
    t = np.moveaxis(np.asarray(f.vectors).reshape((r,) + dims), axis + 1, 1)
    k = dims[axis]
    v = t.reshape(r, k, -1).transpose(1, 0, 2).reshape(r * k, -1)
    regs = tuple(x for x in f.registers if x.label != label)
    c = np.kron(np.eye(k), f.coeffs)
    return FactoredDensity(regs, v, c, f.decohered - {label}).compressed()


def _measure(branches, regs, basis, name):
    projectors = [(lb, np.outer(v, v.conj())) for lb, v in zip(basis.labels, basis.vectors)]
    if basis.partial:
        rest = np.eye(basis.dim) - sum(p for _, p in projectors)
        projectors.append((OUTSIDE, rest))
    out = []
    for b in branches:
        for lb, proj in projectors:
            p, post = project(b.state, proj, regs, BRANCH_FLOOR)
            if post is not None and b.weight * p > BRANCH_FLOOR:
                out.append(Branch({**b.outcomes, name: lb}, b.weight * p, post))
    if len(out) > MAX_BRANCHES:
        raise ProtocolError(f"measurement {name!r} splits the ensemble into more than {MAX_BRANCHES} branches")
    return out


def _matches(b: Branch, events) -> bool:
    return all(b.outcomes.get(ev.name) == ev.label for ev in events)


def _evaluate(q, branches, plan) -> float:
    if isinstance(q, Prob):
        den = sum(b.weight for b in branches if _matches(b, q.given))
        num = sum(b.weight for b in branches if _matches(b, q.given) and _matches(b, q.events))
        return num / den if den > 0 else math.nan
    if isinstance(q, Corr):
        total = 0.0
        for b in branches:
            values = [b.outcomes[n] for n in q.names]
            if OUTSIDE in values:
                # weight outside a partial basis has no numeric outcome
                if b.weight > LEAK_TOL:
                    return math.nan
                continue
            total += b.weight * math.prod(values)
        return float(total)
    if isinstance(q, Fidelity):
        info = plan.states[q.state]
        chosen = [b for b in branches if _matches(b, q.given)]
        den = sum(b.weight for b in chosen)
        if den <= 0:
            return math.nan
        rho = sum(b.weight * partial_trace(b.state, list(info.registers)).matrix for b in chosen) / den
        regs = [plan.registers[n] for n in info.registers]
        return fidelity(DensityOperator(tuple(regs), rho), StateVector(tuple(regs), info.vector))
    raise TypeError(q)


def execute(ast: ProtocolAST, seed: int = meas.DEFAULT_SEED) -> ReportDocument:
    """Run ``ast`` and evaluate its assertions.

    The run keeps every measurement branch with its weight, so probabilities
    are exact; ``seed`` only picks the single history shown as a sample.
    """
    t0 = time.perf_counter()
    plan = compile_program(ast)
    if not plan.ok:
        errors = [d for d in plan.diagnostics if d.is_error]
        raise ProtocolError(f"{len(errors)} error(s) in {ast.source_name}", errors)
    branches = [Branch({}, 1.0, _initial_state(plan))]
    records: dict = {}
    checks = []
    regs_of = plan.registers
    for node, payload in plan.steps:
        if isinstance(node, Assert):
            expected, tol = payload
            actual = _evaluate(node.quantity, branches, plan)
            checks.append(check(format_quantity(node.quantity), actual, expected, tol, node.relation))
            continue
        if isinstance(node, Measure):
            branches = _measure(branches, [regs_of[n] for n in node.registers], payload[0], node.name)
            continue
        new, rec = [], None
        for b in branches:
            st = b.state
            if isinstance(node, Premeasure):
                st, rec = meas.premeasure(st, regs_of[node.system], payload[0], [regs_of[a] for a in node.ancillas])
            elif isinstance(node, Decohere):
                basis, strength = payload
                st = meas.decohere(as_factored(st), [regs_of[n] for n in node.registers], basis, strength)
            elif isinstance(node, Undo):
                st = meas.undo_premeasure(st, records[node.system][-1])
            elif isinstance(node, Apply):
                st = apply_unitary(st, payload[0], [regs_of[n] for n in node.registers])
            elif isinstance(node, Discard):
                st = _trace_out(st, node.register)
            new.append(Branch(b.outcomes, b.weight, st))
        # the record is the same in every branch
        if isinstance(node, Premeasure):
            records.setdefault(node.system, []).append(rec)
        elif isinstance(node, Undo):
            records[node.system].pop()
        branches = new

    rng = np.random.default_rng(seed)
    weights = np.array([b.weight for b in branches])
    sample = branches[int(rng.choice(len(branches), p=weights / weights.sum()))].outcomes if branches else {}
    marginals: dict = {}
    for b in branches:
        for name, lb in b.outcomes.items():
            m = marginals.setdefault(name, {})
            m[lb] = m.get(lb, 0.0) + b.weight
    rows = [{**b.outcomes, "probability": b.weight} for b in branches]
    return ReportDocument(
        Path(ast.source_name).stem,
        parameters={"registers": {n: r.dim for n, r in regs_of.items()}},
        tables={"branches": rows},
        derived_quantities={"marginals": marginals, "sampled_outcomes": sample},
        assertions=checks,
        seed=seed,
        timings={"seconds": time.perf_counter() - t0},
    )
