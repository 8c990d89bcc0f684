"""Series, quadrature and gamma-draw Monte Carlo on random parameter sets.

Writes one CSV row per set with the three estimates and the agreement
checks; the random sets are the ones the test suite uses.

    python3 scripts/oracle_triangle.py --count 200 --trials 1000000 --out triangle.csv
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from scipy import stats

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from sweep import random_params  # noqa: E402

from ricianlbb.analytic import outage_quadrature, outage_series  # noqa: E402
from ricianlbb.montecarlo import estimate_params  # noqa: E402

COVERAGE = 2.0 * stats.norm.cdf(3.0) - 1.0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("--trials", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=2024, help="seed of the parameter draw")
    parser.add_argument("--out", type=Path, default=Path("triangle.csv"))
    args = parser.parse_args()

    fields = ["index", "main_shape", "main_rate", "eve_shape", "eve_rate", "rate", "series", "method",
              "quadrature", "rel_diff", "mc", "mc_count", "mc_lo", "mc_hi", "series_ok", "mc_ok"]
    bad = 0
    with args.out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for i, p in enumerate(random_params(args.count, args.seed)):
            s = outage_series(p)
            q = outage_quadrature(p).value
            mc = estimate_params(p, trials=args.trials, seed=i)
            lo, hi = stats.binom.interval(COVERAGE, args.trials, q)
            series_ok = abs(s.value - q) <= max(1e-6 * q, 1e-12)
            mc_ok = lo <= mc.outage_count <= hi
            bad += not (series_ok and mc_ok)
            w.writerow({"index": i, "main_shape": p.main.shape, "main_rate": p.main.rate,
                        "eve_shape": p.eve.shape, "eve_rate": p.eve.rate, "rate": p.rate,
                        "series": s.value, "method": s.method, "quadrature": q,
                        "rel_diff": abs(s.value - q) / q if q > 0 else 0.0, "mc": mc.estimate_outage,
                        "mc_count": mc.outage_count, "mc_lo": int(lo), "mc_hi": int(hi),
                        "series_ok": series_ok, "mc_ok": mc_ok})
    print(f"{args.count - bad}/{args.count} sets agree; table in {args.out}")


if __name__ == "__main__":
    main()
