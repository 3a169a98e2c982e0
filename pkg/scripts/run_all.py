"""Run every named scenario and every shipped .wig program; write JSON reports.

    python scripts/run_all.py [--out reports] [--seed 42]

Exits 1 if any assertion fails.
"""

import argparse
import sys
from pathlib import Path

from wignerlab.protoparse import execute, load, shipped_programs
from wignerlab.reports import emit_report
from wignerlab.runner import SCENARIOS, RunOptions, run_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("reports"))
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    docs = [("", run_scenario(name, RunOptions(seed=args.seed))) for name in SCENARIOS]
    docs += [("wig-", execute(load(path), args.seed)) for path in shipped_programs().values()]
    failed = 0
    for prefix, doc in docs:
        (args.out / f"{prefix}{doc.scenario}.json").write_bytes(emit_report(doc))
        n, bad = len(doc.assertions), len(doc.failures)
        failed += bad > 0
        print(f"{'FAIL' if bad else 'ok  '} {prefix}{doc.scenario}: {n - bad}/{n}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
