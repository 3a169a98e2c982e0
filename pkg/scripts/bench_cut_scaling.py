"""Wall-clock of the Heisenberg-cut run for growing Friend size m.

    python scripts/bench_cut_scaling.py [--m 2:20:2] [--leak 0] [--budget 60]

Prints a CSV table (m, p, visibility, seconds) and exits 1 when the largest
m exceeds the budget.
"""

import sys

from wignerlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["bench", "--format", "csv", "--timings", *sys.argv[1:]]))
