"""Type I / Type II error rates of the edge and direction tests per alpha.

    python scripts/error_curves.py --family exp --sizes 50000 100000 --replicates 100

Writes a CSV of curve points (``--out``, default stdout) that any plotting
tool can read.
"""

import argparse
import csv
import sys

from cumpair.bench import CURVE_HEADER, STUDY_ALPHAS, ExperimentGrid, type_error_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", nargs="+", default=["exp"])
    ap.add_argument("--sizes", nargs="+", type=int, default=[5000, 10000, 50000, 100000])
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()

    grid = ExperimentGrid(cases=("case1", "case2"), families=tuple(args.family),
                          sample_sizes=tuple(args.sizes), replicates=args.replicates,
                          alphas=STUDY_ALPHAS, master_seed=args.seed)
    rows = type_error_curves(grid, workers=args.workers)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for r in rows:
        w.writerow(["" if getattr(r, h) is None else getattr(r, h) for h in CURVE_HEADER])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
