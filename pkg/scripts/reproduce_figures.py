"""Regenerate the figure presets as CSV tables and SVG plots.

    python3 scripts/reproduce_figures.py --out results --trials 1000000
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from ricianlbb.presets import FIGURES, run_preset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("figures", nargs="*", default=list(FIGURES), choices=FIGURES)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--no-mc", action="store_true", help="analytic curves only")
    args = parser.parse_args()
    for fig in args.figures:
        t0 = time.time()
        files = run_preset(fig, args.out, trials=args.trials, seed=args.seed, with_mc=not args.no_mc)
        print(f"{fig}: {', '.join(str(f) for f in files)} ({time.time() - t0:.0f} s)")


if __name__ == "__main__":
    main()
