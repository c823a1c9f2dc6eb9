"""Accuracy tables for Case 1 and Case 2 from a bench config.

    python scripts/run_tables.py --config paper_full --alpha 1e-4 --out results/
    python scripts/run_tables.py --config paper_smoke --scale 2

Prints one table per case (rows: noise family, columns: sample size) and
writes results.csv and curves.csv to ``--out`` when given.
"""

import argparse
import logging
from dataclasses import replace
from pathlib import Path

from cumpair import bench


def pivot(records, case, alpha):
    rows = [r for r in records if r.case == case and r.alpha == alpha]
    sizes = sorted({r.n for r in rows})
    fams = sorted({r.family for r in rows})
    cell = {(r.family, r.n): r.accuracy for r in rows}
    lines = [f"{case} accuracy at alpha={alpha:g}", "family".ljust(8) + "".join(f"{n:>9d}" for n in sizes)]
    for f in fams:
        lines.append(f.ljust(8) + "".join(f"{cell[(f, n)]:9.2f}" for n in sizes))
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="paper_full", help="INI path or shipped config name")
    ap.add_argument("--alpha", type=float, default=1e-4)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--rule", choices=["pvalue", "four_outcome"], help="override the direction rule")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    grid = bench.grid_from_mapping(bench.load_config(args.config)).scaled(args.scale)
    if args.rule:
        grid = replace(grid, direction_rule=args.rule)
    if args.alpha not in grid.alphas:
        grid = replace(grid, alphas=grid.alphas + (args.alpha,))
    cells = bench.simulate_grid(grid, workers=args.workers)
    records = bench.records_from(cells, grid)
    for case in grid.cases:
        print(pivot(records, case, args.alpha), end="\n\n")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        bench.export_results(records, args.out / "results.csv")
        bench.export_curves(bench.curves_from(cells, grid), args.out / "curves.csv")


if __name__ == "__main__":
    main()
