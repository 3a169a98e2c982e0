"""Report documents and their deterministic JSON / CSV serialisation."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .meas import DEFAULT_SEED

SCHEMA = "wigner-lab/1"
# wall-clock fields; withheld unless timings are requested so output is reproducible
TIMING_KEYS = frozenset({"seconds"})


class ReportFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AssertionOutcome:
    name: str
    expected: float
    actual: float
    tol: float
    relation: str = "=="

    def __post_init__(self):
        if self.relation not in ("==", "<=", ">="):
            raise ValueError(f"unknown relation {self.relation!r}")
        if not self.tol >= 0:
            raise ValueError("tolerance must be non-negative")

    @property
    def delta(self) -> float:
        return float(self.actual - self.expected)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.actual):
            return False
        if self.relation == "==":
            return abs(self.delta) <= self.tol
        if self.relation == "<=":
            return self.delta <= self.tol
        return self.delta >= -self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "relation": self.relation,
            "expected": self.expected,
            "actual": self.actual,
            "delta": self.delta,
            "tol": self.tol,
            "passed": self.passed,
        }


def check(name: str, actual, expected, tol: float, relation: str = "==") -> AssertionOutcome:
    return AssertionOutcome(name, float(expected), float(np.real(actual)), float(tol), relation)


@dataclass
class ReportDocument:
    scenario: str
    parameters: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> list of row dicts
    derived_quantities: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    seed: int = DEFAULT_SEED
    version: str = __version__
    timings: dict = field(default_factory=dict)
    sweep: str | None = None  # table written by CSV export

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> list[AssertionOutcome]:
        return [a for a in self.assertions if not a.passed]

    def summary(self) -> str:
        n, bad = len(self.assertions), len(self.failures)
        lines = [f"{self.scenario}: {n - bad}/{n} assertions passed"]
        for a in self.assertions:
            mark = "ok  " if a.passed else "FAIL"
            lines.append(
                f"  {mark} {a.name}: actual {a.actual:.12g} {a.relation} {a.expected:.12g} "
                f"(delta {a.delta:.3g}, tol {a.tol:.3g})"
            )
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# serialisation


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(_key(x) for x in k)
    if isinstance(k, enum.Enum):
        return str(k.value)
    if isinstance(k, (float, np.floating)):
        return format_number(k)
    return str(k)


def _plain(obj, timings: bool):
    """Reduce ``obj`` to dict / list / str / number / bool / None."""
    if isinstance(obj, dict):
        return {
            _key(k): _plain(v, timings)
            for k, v in obj.items()
            if timings or _key(k) not in TIMING_KEYS
        }
    if isinstance(obj, AssertionOutcome):
        return _plain(obj.as_dict(), timings)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (frozenset, set)):
        return [_plain(v, timings) for v in sorted(obj, key=repr)]
    if isinstance(obj, (list, tuple)):
        return [_plain(v, timings) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist(), timings)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _write_json(obj, out: list, indent: int):
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for n, (k, v) in enumerate(obj.items()):
            out.append(f"{inner}{_json_string(k)}: ")
            _write_json(v, out, indent + 1)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            parts: list = []
            for v in obj:
                _write_json(v, parts, 0)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for n, v in enumerate(obj):
            out.append(inner)
            _write_json(v, out, indent + 1)
            out.append(",\n" if n < len(obj) - 1 else "\n")
        out.append(pad + "]")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(_json_string(obj))
    elif isinstance(obj, (bool, int, float)):
        out.append(format_number(obj))
    else:
        out.append(_json_string(str(obj)))


def _json_string(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def document_dict(doc: ReportDocument, timings: bool = False) -> dict:
    body = {
        "schema": SCHEMA,
        "scenario": doc.scenario,
        "version": doc.version,
        "seed": doc.seed,
        "parameters": doc.parameters,
        "tables": doc.tables,
        "derived_quantities": doc.derived_quantities,
        "assertions": doc.assertions,
        "passed": doc.passed,
    }
    if timings:
        body["timings"] = doc.timings
    return _plain(body, timings)


def emit_report(doc: ReportDocument, fmt: str = "json", timings: bool = False) -> bytes:
    """Serialise ``doc``; numbers carry 17 significant digits.

    Identical documents give identical bytes. Wall-clock values are left
    out (JSON) or blank (CSV) unless ``timings`` is set.
    """
    if fmt == "json":
        out: list = []
        _write_json(document_dict(doc, timings), out, 0)
        return ("".join(out) + "\n").encode("utf-8")
    if fmt == "csv":
        return _emit_csv(doc, timings)
    raise ReportFormatError(f"unknown report format {fmt!r} (expected json or csv)")


def _emit_csv(doc: ReportDocument, timings: bool) -> bytes:
    if doc.sweep is None or doc.sweep not in doc.tables:
        raise ReportFormatError(f"report {doc.scenario!r} has no sweep table; CSV is only for sweeps")
    rows = doc.tables[doc.sweep]
    columns: list = []
    for row in rows:
        for k in row:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c)
            if v is None or (c in TIMING_KEYS and not timings):
                cells.append("")
            elif isinstance(v, (bool, int, float, np.number)):
                cells.append(format_number(v))
            else:
                cells.append(_key(v))
        w.writerow(cells)
    return buf.getvalue().encode("utf-8")
