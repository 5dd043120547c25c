#!/usr/bin/env python3
"""Run the scaling study sweep and write bench.csv.

Equivalent to `medmatch bench`; kept as a script so the sweep can be
launched and tweaked without installing the CLI entry point.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from medmatch.cli import main

if __name__ == "__main__":
    args = sys.argv[1:] or ["--out", "bench.csv"]
    sys.exit(main(["bench", *args]))
