"""Command-line entry point: ``cumpair {generate,cumulants,discover,bench}``.

Every subcommand accepts ``--config FILE``; values are read from the INI
section named after the subcommand and flags given on the command line
override them.  The default seed comes from ``CUMPAIR_SEED`` when set.

Exit codes of ``discover``: 0 definitive verdict, 2 inconclusive, 1 error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from cumpair import bench
from cumpair.cumulants import PairedSample, cumulant_profile
from cumpair.errors import CumpairError, InvalidModel, OrderOutOfRange, ParseError
from cumpair.inference import BootstrapConfig, DirectionRule, collect_evidence
from cumpair.model import (
    NonlinearSpec,
    PairModel,
    Structure,
    family_spec,
    random_model,
    sample,
    sample_nonlinear,
)

log = logging.getLogger("cumpair")

DEFAULT_KEYS = ((3, 0), (0, 3), (2, 1), (1, 2), (4, 1), (3, 2), (2, 3), (1, 4))
SEED_ENV = "CUMPAIR_SEED"

CASE_NAMES = {
    "confounder-only": Structure.CONFOUNDER_ONLY,
    "case1": Structure.CONFOUNDER_ONLY,
    "x-to-y": Structure.X_TO_Y,
    "case2": Structure.X_TO_Y,
    "y-to-x": Structure.Y_TO_X,
}

DEFAULTS = {
    "generate": {"case": "confounder-only", "family": "exp", "n": 10000, "lambda1": None,
                 "lambda2": None, "eta": None, "nonlinear": False, "out": None},
    "cumulants": {"keys": None},
    "discover": {"alpha": 1e-4, "m_fraction": 0.8, "B": 30, "direction_rule": "four_outcome",
                 "fourth_order": False, "report": None},
    "bench": {"out": "bench_out", "scale": 1.0, "workers": 1},
}
TYPES = {"n": int, "B": int, "workers": int, "seed": int, "alpha": float, "m_fraction": float,
         "scale": float, "lambda1": float, "lambda2": float, "eta": float}
FLAGS = {"nonlinear", "fourth_order"}


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge defaults, the config-file section, then explicit flags."""
    values = dict(DEFAULTS[command])
    values["seed"] = default_seed()
    if getattr(args, "config", None):
        parser = configparser.ConfigParser()
        parser.optionxform = str
        path = Path(args.config)
        if not path.exists():
            path = bench.shipped_config(args.config)
        if not parser.read(path):
            raise FileNotFoundError(f"cannot read config {args.config}")
        if parser.has_section(command):
            for key, raw in parser[command].items():
                key = key.replace("-", "_")
                if key in FLAGS:
                    values[key] = raw.strip().lower() in ("1", "true", "yes", "on")
                else:
                    values[key] = TYPES.get(key, str)(raw)
    for key, val in vars(args).items():
        if key in ("command", "func", "config", "verbose", "input") or val is None:
            continue
        if key in FLAGS and val is False:
            continue
        values[key] = val
    return values


def header_line(command: str, config: dict) -> str:
    return "# cumpair " + command + " " + json.dumps(config, sort_keys=True, default=str)


def write_dataset(data: PairedSample, path, header: str | None = None) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        if header:
            fh.write(header + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["X", "Y"])
        w.writerows(zip(map(repr, data.x.tolist()), map(repr, data.y.tolist())))
    finally:
        if fh is not sys.stdout:
            fh.close()


def load_dataset(path) -> PairedSample:
    """Read a two-column ``X,Y`` CSV; lines starting with ``#`` are skipped."""
    xs, ys = [], []
    seen_header = False
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].lstrip().startswith("#")):
                continue
            if not seen_header:
                if [c.strip().upper() for c in row] != ["X", "Y"]:
                    raise ParseError(f"line {lineno}: expected header 'X,Y', got {row}")
                seen_header = True
                continue
            if len(row) != 2:
                raise ParseError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError:
                raise ParseError(f"line {lineno}: cannot parse {row} as numbers") from None
    if not seen_header:
        raise ParseError(f"{path}: no 'X,Y' header found")
    return PairedSample(np.array(xs), np.array(ys))


def parse_key(text: str) -> tuple[int, int]:
    try:
        i, j = (int(t) for t in text.split(","))
    except ValueError:
        raise OrderOutOfRange(f"key {text!r} is not of the form i,j") from None
    return i, j


def cmd_generate(args) -> int:
    cfg = resolve(args, "generate")
    structure = CASE_NAMES.get(cfg["case"])
    if structure is None:
        raise InvalidModel(f"unknown case {cfg['case']!r}; choose from {sorted(CASE_NAMES)}")
    spec = family_spec(cfg["family"])
    if spec.is_gaussian:
        warnings.warn("Gaussian noise: higher-order cumulants vanish, so cumulant-based "
                      "discovery is uninformative on this dataset", stacklevel=1)
    seed = cfg["seed"]
    drawn = random_model("case1" if structure is Structure.CONFOUNDER_ONLY else "case2", spec, (seed, 0))
    l1 = cfg["lambda1"] if cfg["lambda1"] is not None else drawn.lambda1
    l2 = cfg["lambda2"] if cfg["lambda2"] is not None else drawn.lambda2
    eta = None
    if structure is not Structure.CONFOUNDER_ONLY:
        eta = cfg["eta"] if cfg["eta"] is not None else drawn.eta
    model = PairModel(structure, l1, l2, eta, spec, spec, spec)
    cfg.update(lambda1=l1, lambda2=l2, eta=eta)
    if cfg["nonlinear"]:
        nl = NonlinearSpec.random((seed, 2))
        cfg["nonlinear_coefficients"] = [nl.d_lx, nl.d_ly, nl.d_edge]
        data = sample_nonlinear(model, nl, cfg["n"], (seed, 1))
    else:
        data = sample(model, cfg["n"], (seed, 1))
    write_dataset(data, cfg["out"], header_line("generate", cfg))
    if cfg["out"] not in (None, "-"):
        print(f"wrote {data.n} rows to {cfg['out']}")
    return 0


def cmd_cumulants(args) -> int:
    cfg = resolve(args, "cumulants")
    raw = cfg["keys"]
    if isinstance(raw, str):
        # Config files list keys separated by whitespace or semicolons.
        raw = raw.replace(";", " ").split()
    keys = [parse_key(k) for k in raw] if raw else list(DEFAULT_KEYS)
    cfg["keys"] = [f"{i},{j}" for i, j in keys]
    cfg["input"] = str(args.input)
    data = load_dataset(args.input)
    profile = cumulant_profile(data, keys)
    print(header_line("cumulants", cfg))
    print(f"# n = {data.n}")
    print("i,j,cumulant")
    for i, j in keys:
        print(f"{i},{j},{profile[(i, j)]!r}")
    return 0


def cmd_discover(args) -> int:
    cfg = resolve(args, "discover")
    cfg["input"] = str(args.input)
    data = load_dataset(args.input)
    config = BootstrapConfig(cfg["m_fraction"], cfg["B"], cfg["seed"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        evidence = collect_evidence(data, config, fourth_order=cfg["fourth_order"])
    decision = evidence.decide(cfg["alpha"], DirectionRule(cfg["direction_rule"]))

    def clean(col):
        return [None if math.isnan(v) else v for v in col.tolist()]

    report = {
        "config": cfg,
        "n": data.n,
        **decision.to_dict(),
        "bootstrap": {
            "edge_statistic": clean(evidence.replicates[:, 0]),
            "r_x_to_y": clean(evidence.replicates[:, 1]),
            "r_y_to_x": clean(evidence.replicates[:, 2]),
            "direction_failures": evidence.direction_failures,
        },
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if cfg["report"] and cfg["report"] != "-":
        Path(cfg["report"]).write_text(text + "\n")
        print(f"verdict: {decision.verdict.value}")
    else:
        print(text)
    return 0 if decision.verdict.definitive else 2


def cmd_bench(args) -> int:
    cfg = resolve(args, "bench")
    source = args.config or "paper_smoke"
    section = bench.load_config(source, "bench")
    grid = bench.grid_from_mapping(section)
    if args.seed is not None:
        grid = replace(grid, master_seed=args.seed)
    grid = grid.scaled(cfg["scale"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)

    cells = bench.simulate_grid(grid, workers=cfg["workers"])
    records = bench.records_from(cells, grid)
    curves = bench.curves_from(cells, grid)
    bench.export_results(records, out / "results.csv")
    bench.export_curves(curves, out / "curves.csv")

    resolved = configparser.ConfigParser()
    resolved.optionxform = str
    resolved["bench"] = {
        "cases": ", ".join(grid.cases), "families": ", ".join(grid.families),
        "sample_sizes": ", ".join(map(str, grid.sample_sizes)),
        "replicates": str(grid.replicates), "alphas": ", ".join(map(repr, grid.alphas)),
        "master_seed": str(grid.master_seed), "m_fraction": repr(grid.m_fraction),
        "B": str(grid.B), "direction_rule": grid.direction_rule,
        "latent_cubic": str(grid.latent_cubic), "source": str(source),
    }
    with (out / "resolved_config.ini").open("w") as fh:
        resolved.write(fh)
    print(f"wrote {len(records)} result rows and {len(curves)} curve rows to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cumpair", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI file with a section for this subcommand")
        sp.add_argument("--seed", type=int, help=f"random seed (default ${SEED_ENV} or 0)")

    g = sub.add_parser("generate", help="simulate a dataset")
    common(g)
    g.add_argument("--case", choices=sorted(CASE_NAMES))
    g.add_argument("--family", help="exp, gamma3, gumbel or gaussian")
    g.add_argument("--n", type=int)
    g.add_argument("--lambda1", type=float)
    g.add_argument("--lambda2", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--nonlinear", action="store_true", help="add cubic terms on every edge")
    g.add_argument("--out", help="output CSV (default stdout)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("cumulants", help="estimate joint cumulants of a dataset")
    common(c)
    c.add_argument("input")
    c.add_argument("--keys", action="append", metavar="i,j", help="repeatable; default: order 3 and 5 keys")
    c.set_defaults(func=cmd_cumulants)

    d = sub.add_parser("discover", help="test for an edge and its direction")
    common(d)
    d.add_argument("input")
    d.add_argument("--alpha", type=float)
    d.add_argument("--m-fraction", dest="m_fraction", type=float)
    d.add_argument("--B", dest="B", type=int)
    d.add_argument("--direction-rule", dest="direction_rule", choices=[r.value for r in DirectionRule])
    d.add_argument("--fourth-order", dest="fourth_order", action="store_true",
                   help="also require the order-4 constraint before accepting no edge")
    d.add_argument("--report", "--out", dest="report", help="write the JSON report here")
    d.set_defaults(func=cmd_discover)

    b = sub.add_parser("bench", help="run a simulation grid")
    common(b)
    b.add_argument("--out", help="output directory")
    b.add_argument("--scale", type=float, help="divide replicates and sample sizes")
    b.add_argument("--workers", type=int)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CumpairError, OSError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
