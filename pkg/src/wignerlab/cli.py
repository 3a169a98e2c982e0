"""Command-line front end.

Exit status carries the verdict: 0 when every assertion passes, 1 when one
fails, 2 for usage, file or parse errors.  The report goes to stdout or
``--out``; a short human summary goes to stderr.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

from . import __version__
from .meas import DEFAULT_SEED, FriendPolicy
from .protoparse import ProtocolError, execute, parse_file
from .reports import ReportFormatError, emit_report
from .runner import SCENARIOS, RunOptions, build_bench, run_scenario

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
SWEEPABLE = ("eraser", "cut-scaling")
AGENTS = ("wigner", "friend", "direct")


class UsageError(Exception):
    pass


_PI_FORM = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/((?:\d+(?:\.\d*)?|\.\d+)))?$")


def _float(text: str) -> float:
    """A float literal, or a multiple of pi such as ``pi/2``, ``-3pi/4`` or ``0.5*pi``."""
    t = text.strip().lower().replace(" ", "")
    try:
        x = float(t)
    except ValueError:
        m = _PI_FORM.match(t)
        if not m:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
        coef = float(m.group(1)) if coef is None else coef
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0:
            raise argparse.ArgumentTypeError(f"division by zero in {text!r}") from None
        x = coef * math.pi / den
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return x


def _phis(text: str) -> tuple[float, ...]:
    return tuple(_float(x) for x in text.split(",") if x.strip())


def _ms(text: str) -> tuple[int, ...]:
    """``12``, ``1,2,5`` or an inclusive range ``1:12`` / ``2:20:2``."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi, step = parts[0], parts[1], parts[2] if len(parts) == 3 else 1
            if step <= 0:
                raise ValueError
            out = tuple(range(lo, hi + 1, step))
        else:
            out = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --m value {text!r}; use 12, 1,2,5 or 1:12[:step]") from None
    if not out or min(out) < 0:
        raise argparse.ArgumentTypeError(f"--m needs non-negative integers, got {text!r}")
    return out


def _leak(text: str) -> float:
    p = _float(text)
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"--leak must lie in [0, 1], got {p}")
    return p


def _positive(text: str) -> float:
    x = _float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _agents(text: str) -> tuple[str, ...]:
    out = tuple(a.strip().lower() for a in text.split(","))
    bad = [a for a in out if a not in AGENTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown agent {bad[0]!r}; choose from {', '.join(AGENTS)}")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default %(default)s)")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds in the report")
    p.add_argument("--policy", choices=[x.value for x in FriendPolicy])
    p.add_argument("--phi", type=_phis, help="comma-separated angles in radians; 'pi/2' is accepted")
    p.add_argument("--m", type=_ms, help="environment sizes: 12, 1,2,5 or 1:12[:step]")
    p.add_argument("--leak", type=_leak, help="leak probability per environment qubit")
    p.add_argument("--grid-deg", type=_positive, help="Brukner grid step in degrees")
    p.add_argument("--agents", type=_agents, help="GHZ station roles, e.g. wigner,friend,friend")
    p.add_argument("--alpha", type=_float, help="sealed-lab beam-splitter angle")
    p.add_argument("--budget", type=_positive, default=60.0, help="bench time limit in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the scenario names")
    run = sub.add_parser("run", help="run a named scenario or a .wig program")
    run.add_argument("target", help="scenario name or path to a .wig file")
    _common(run)
    sweep = sub.add_parser("sweep", help="run a parameter sweep and emit its table")
    sweep.add_argument("target", nargs="?", default="cut-scaling", choices=SWEEPABLE)
    _common(sweep)
    bench = sub.add_parser("bench", help="time the cut-scaling run over m")
    _common(bench)
    return parser


def _options(args) -> RunOptions:
    return RunOptions(
        seed=args.seed,
        policy=FriendPolicy(args.policy) if args.policy else None,
        phis=args.phi,
        m=args.m,
        leak=args.leak,
        grid_deg=args.grid_deg,
        agents=args.agents,
        alpha=args.alpha,
        budget=args.budget,
    )


def _run_file(path: Path, seed: int):
    ast = parse_file(path)
    if isinstance(ast, list):
        raise ProtocolError(f"{len(ast)} problem(s) in {path}", ast)
    return execute(ast, seed)


def _document(args):
    opts = _options(args)
    if args.command == "bench":
        return build_bench(opts)
    target = args.target
    if args.command == "run" and (target.endswith(".wig") or Path(target).is_file()):
        return _run_file(Path(target), args.seed)
    if target not in SCENARIOS:
        raise UsageError(f"unknown scenario {target!r}; choose from {', '.join(SCENARIOS)} or give a .wig file")
    return run_scenario(target, opts)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.command == "list":
        print("\n".join(SCENARIOS))
        return EXIT_OK
    try:
        doc = _document(args)
        data = emit_report(doc, args.format, timings=args.timings)
    except ProtocolError as exc:
        name = getattr(args, "target", "<input>")
        for d in exc.diagnostics:
            print(d.format(name), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ReportFormatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        try:
            args.out.write_bytes(data)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    print(doc.summary(), file=sys.stderr)
    return EXIT_OK if doc.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
