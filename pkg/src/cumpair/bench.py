"""Simulation study: accuracy tables and Type I / Type II error curves.

Each grid cell (case, noise family, sample size) draws ``replicates``
random models and datasets, collects bootstrap evidence once per dataset,
and scores the verdict at every significance level.

Case 2 datasets alternate the true direction: even replicates are X -> Y,
odd replicates are the same draw with the columns swapped (Y -> X).
"""

from __future__ import annotations

import configparser
import csv
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from cumpair.errors import CumpairError
from cumpair.inference import BootstrapConfig, DirectionRule, PairEvidence, Verdict, collect_evidence
from cumpair.model import (
    FAMILY_ALIASES,
    FAMILIES,
    NonlinearSpec,
    random_model,
    sample,
    sample_nonlinear,
    stable_id,
)

log = logging.getLogger(__name__)

CASES = ("case1", "case2", "case1-nonlinear", "case2-nonlinear")
STUDY_FAMILIES = ("exp", "gamma3", "gumbel")
STUDY_SIZES = (5000, 10000, 50000, 100000)
STUDY_ALPHAS = (0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001)

RESULT_HEADER = ["case", "family", "n", "alpha", "replicates", "accuracy", "type1", "type2", "seconds"]
CURVE_HEADER = ["test", "case", "family", "n", "alpha", "replicates", "type1", "type2"]
GRID_KEYS = ("cases", "families", "sample_sizes", "replicates", "alphas", "master_seed")


@dataclass(frozen=True)
class ExperimentGrid:
    cases: tuple[str, ...] = ("case1", "case2")
    families: tuple[str, ...] = STUDY_FAMILIES
    sample_sizes: tuple[int, ...] = STUDY_SIZES
    replicates: int = 100
    alphas: tuple[float, ...] = STUDY_ALPHAS
    master_seed: int = 0
    m_fraction: float = 0.8
    B: int = 30
    direction_rule: str = DirectionRule.PVALUE.value
    latent_cubic: bool = True

    def __post_init__(self):
        cases = tuple(c.lower() for c in self.cases)
        fams = tuple(FAMILY_ALIASES.get(f.lower(), f.lower()) for f in self.families)
        for c in cases:
            if c not in CASES:
                raise ValueError(f"unknown case {c!r}; choose from {CASES}")
        for f in fams:
            if f not in FAMILIES:
                raise ValueError(f"unknown family {f!r}; choose from {sorted(FAMILIES)}")
        if not (cases and fams and self.sample_sizes and self.alphas):
            raise ValueError("every grid dimension must be non-empty")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        object.__setattr__(self, "cases", cases)
        object.__setattr__(self, "families", fams)
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        DirectionRule(self.direction_rule)

    def scaled(self, factor: float) -> ExperimentGrid:
        """Divide replicates and sample sizes by ``factor`` for quick runs."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        if factor == 1:
            return self
        return replace(
            self,
            replicates=max(1, int(self.replicates / factor)),
            sample_sizes=tuple(max(10, int(n / factor)) for n in self.sample_sizes),
        )

    def cells(self):
        for case in self.cases:
            for family in self.families:
                for n in self.sample_sizes:
                    yield case, family, n


@dataclass(frozen=True)
class ReplicateOutcome:
    truth: Verdict
    evidence: PairEvidence | None
    error: str | None = None


@dataclass
class CellOutcome:
    case: str
    family: str
    n: int
    outcomes: list[ReplicateOutcome]
    seconds: float


@dataclass(frozen=True)
class ResultRecord:
    case: str
    family: str
    n: int
    alpha: float
    replicates: int
    accuracy: float
    type1: float | None
    type2: float | None
    seconds: float
    verdicts: tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class CurveRow:
    test: str
    case: str
    family: str
    n: int
    alpha: float
    replicates: int
    type1: float | None
    type2: float | None


def _replicate_seed(grid: ExperimentGrid, case: str, family: str, n: int, r: int) -> tuple[int, ...]:
    base = case.replace("-nonlinear", "")
    return (grid.master_seed, stable_id(base), stable_id(family), n, r)


def run_replicate(grid: ExperimentGrid, case: str, family: str, n: int, r: int) -> ReplicateOutcome:
    """Generate one dataset of a cell and collect its bootstrap evidence."""
    seed = _replicate_seed(grid, case, family, n, r)
    is_case2 = case.startswith("case2")
    truth = Verdict.NO_EDGE
    if is_case2:
        truth = Verdict.X_TO_Y if r % 2 == 0 else Verdict.Y_TO_X
    try:
        model = random_model("case2" if is_case2 else "case1", family, seed + (0,))
        if case.endswith("nonlinear"):
            nl = NonlinearSpec.random(seed + (2,), latent_edges=grid.latent_cubic)
            data = sample_nonlinear(model, nl, n, seed + (1,))
        else:
            data = sample(model, n, seed + (1,))
        if truth is Verdict.Y_TO_X:
            data = data.swapped()
        boot_seed = int(np.random.SeedSequence(list(seed) + [3]).generate_state(1)[0])
        config = BootstrapConfig(grid.m_fraction, grid.B, boot_seed)
        evidence = collect_evidence(data, config)
    except (CumpairError, ValueError) as exc:
        log.warning("%s/%s/n=%d replicate %d failed: %s", case, family, n, r, exc)
        return ReplicateOutcome(truth, None, str(exc))
    return ReplicateOutcome(truth, evidence)


def _run_task(args):
    grid, case, family, n, r = args
    start = time.perf_counter()
    out = run_replicate(grid, case, family, n, r)
    return out, time.perf_counter() - start


def simulate_grid(grid: ExperimentGrid, workers: int = 1) -> list[CellOutcome]:
    """Collect evidence for every replicate of every cell.

    Results are ordered by (cell, replicate) whatever the worker count.
    """
    tasks = [(grid, c, f, n, r) for c, f, n in grid.cells() for r in range(grid.replicates)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_task, tasks, chunksize=max(1, grid.replicates // 4)))
        else:
            results = [_run_task(t) for t in tasks]

    cells = []
    for k, (case, family, n) in enumerate(grid.cells()):
        chunk = results[k * grid.replicates:(k + 1) * grid.replicates]
        cells.append(CellOutcome(case, family, n, [o for o, _ in chunk], sum(t for _, t in chunk)))
    return cells


def _verdict(outcome: ReplicateOutcome, alpha: float, rule: str) -> Verdict | None:
    if outcome.evidence is None:
        return None
    return outcome.evidence.decide(alpha, rule).verdict


def _rate(flags: list[bool]) -> float | None:
    return sum(flags) / len(flags) if flags else None


def records_from(cells: list[CellOutcome], grid: ExperimentGrid) -> list[ResultRecord]:
    records = []
    for cell in cells:
        ok = [o for o in cell.outcomes if o.evidence is not None]
        for alpha in grid.alphas:
            verdicts = [_verdict(o, alpha, grid.direction_rule) for o in cell.outcomes]
            correct = sum(v is o.truth for v, o in zip(verdicts, cell.outcomes))
            rejected = [o.evidence.edge_test.rejects(alpha) for o in ok]
            if cell.case.startswith("case1"):
                type1, type2 = _rate(rejected), None
            else:
                type1, type2 = None, _rate([not r for r in rejected])
            records.append(ResultRecord(
                cell.case, cell.family, cell.n, alpha, len(cell.outcomes),
                correct / len(cell.outcomes), type1, type2, cell.seconds,
                tuple("error" if v is None else v.value for v in verdicts),
            ))
    return records


def run_grid(grid: ExperimentGrid, workers: int = 1) -> list[ResultRecord]:
    """One record per (cell, alpha).

    Accuracy is the fraction of replicates whose verdict equals the truth;
    inconclusive verdicts and failed replicates count as wrong.
    """
    return records_from(simulate_grid(grid, workers), grid)


def curves_from(cells: list[CellOutcome], grid: ExperimentGrid) -> list[CurveRow]:
    rows = []
    for cell in cells:
        ok = [o for o in cell.outcomes if o.evidence is not None]
        for alpha in grid.alphas:
            rejected = [o.evidence.edge_test.rejects(alpha) for o in ok]
            if cell.case.startswith("case1"):
                rows.append(CurveRow("edge", cell.case, cell.family, cell.n, alpha, len(ok),
                                     _rate(rejected), None))
                continue
            rows.append(CurveRow("edge", cell.case, cell.family, cell.n, alpha, len(ok),
                                 None, _rate([not r for r in rejected])))
            true_rejected, anti_accepted = [], []
            for o in ok:
                t_xy, t_yx = o.evidence.direction_tests
                true_t, anti_t = (t_xy, t_yx) if o.truth is Verdict.X_TO_Y else (t_yx, t_xy)
                true_rejected.append(true_t.rejects(alpha))
                anti_accepted.append(not anti_t.rejects(alpha))
            rows.append(CurveRow("direction", cell.case, cell.family, cell.n, alpha, len(ok),
                                 _rate(true_rejected), _rate(anti_accepted)))
    return rows


def type_error_curves(grid: ExperimentGrid, cells: list[CellOutcome] | None = None,
                      workers: int = 1) -> list[CurveRow]:
    """Type I / Type II rates of the edge and direction tests per alpha.

    Edge test: Type I = P(reject no-edge | case 1), Type II = P(keep no-edge | case 2).
    Direction test (case 2): Type I = P(reject the true direction),
    Type II = P(keep the anti-causal direction).
    """
    if cells is None:
        cells = simulate_grid(grid, workers)
    return curves_from(cells, grid)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _write_csv(path, header, rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(getattr(row, h)) for h in header])


def export_results(records: list[ResultRecord], path) -> Path:
    """Write records as CSV, floats with 6 significant digits, missing rates blank."""
    _write_csv(path, RESULT_HEADER, records)
    return Path(path)


def export_curves(rows: list[CurveRow], path) -> Path:
    _write_csv(path, CURVE_HEADER, rows)
    return Path(path)


def _opt_float(s: str) -> float | None:
    return None if s == "" else float(s)


def read_results(path) -> list[ResultRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            ResultRecord(r["case"], r["family"], int(r["n"]), float(r["alpha"]),
                         int(r["replicates"]), float(r["accuracy"]), _opt_float(r["type1"]),
                         _opt_float(r["type2"]), float(r["seconds"]))
            for r in reader
        ]


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


def grid_from_mapping(section) -> ExperimentGrid:
    """Build a grid from flat key/value strings; every key in GRID_KEYS is required."""
    for key in GRID_KEYS:
        if key not in section:
            raise KeyError(f"missing config key {key!r}")
    kwargs = dict(
        cases=tuple(_split(section["cases"])),
        families=tuple(_split(section["families"])),
        sample_sizes=tuple(int(v) for v in _split(section["sample_sizes"])),
        replicates=int(section["replicates"]),
        alphas=tuple(float(v) for v in _split(section["alphas"])),
        master_seed=int(section["master_seed"]),
    )
    if "m_fraction" in section:
        kwargs["m_fraction"] = float(section["m_fraction"])
    if "B" in section or "b" in section:
        kwargs["B"] = int(section.get("B", section.get("b")))
    if "direction_rule" in section:
        kwargs["direction_rule"] = section["direction_rule"].strip()
    if "latent_cubic" in section:
        kwargs["latent_cubic"] = section["latent_cubic"].strip().lower() in ("1", "true", "yes", "on")
    return ExperimentGrid(**kwargs)


def shipped_config(name: str) -> Path:
    """Path of a config shipped with the package (``paper_full``, ``paper_smoke``)."""
    ref = resources.files("cumpair") / "configs" / f"{name}.ini"
    if not ref.is_file():
        raise FileNotFoundError(f"no shipped config named {name!r}")
    return Path(str(ref))


def load_config(path_or_name, section: str = "bench") -> configparser.SectionProxy:
    path = Path(path_or_name)
    if not path.exists():
        path = shipped_config(str(path_or_name))
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read(path)
    if not parser.has_section(section):
        raise KeyError(f"config {path} has no [{section}] section")
    return parser[section]
