"""Quantum-eraser fringe over 25 phases, filter on and off, as CSV.

    python scripts/sweep_eraser.py [--out eraser.csv]
"""

import sys

from wignerlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", "eraser", "--format", "csv", *sys.argv[1:]]))
