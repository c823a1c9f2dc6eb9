import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from cumpair.bench import (
    CURVE_HEADER,
    RESULT_HEADER,
    ExperimentGrid,
    export_curves,
    export_results,
    grid_from_mapping,
    load_config,
    read_results,
    records_from,
    run_replicate,
    shipped_config,
    simulate_grid,
    type_error_curves,
)
from cumpair.inference import Verdict

SMALL = ExperimentGrid(
    cases=("case1", "case2"),
    families=("exp",),
    sample_sizes=(5000,),
    replicates=4,
    alphas=(0.05, 1e-4, 1.0),
    master_seed=9,
)


@pytest.fixture(scope="module")
def small_cells():
    return simulate_grid(SMALL)


def _without_seconds(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    k = rows[0].index("seconds")
    return [r[:k] + r[k + 1:] for r in rows]


def test_grid_validation():
    with pytest.raises(ValueError):
        ExperimentGrid(cases=("case3",))
    with pytest.raises(ValueError):
        ExperimentGrid(families=("cauchy",))
    with pytest.raises(ValueError):
        ExperimentGrid(alphas=())
    with pytest.raises(ValueError):
        ExperimentGrid(replicates=0)
    with pytest.raises(ValueError):
        ExperimentGrid(direction_rule="majority")
    assert ExperimentGrid(families=("Gamma",)).families == ("gamma3",)


def test_scaled_grid():
    g = ExperimentGrid(sample_sizes=(5000, 100000), replicates=100).scaled(10)
    assert g.sample_sizes == (500, 10000) and g.replicates == 10
    assert SMALL.scaled(1) is SMALL
    with pytest.raises(ValueError):
        SMALL.scaled(0)


def test_case2_truth_alternates():
    truths = [run_replicate(SMALL, "case2", "exp", 5000, r).truth for r in range(4)]
    assert truths == [Verdict.X_TO_Y, Verdict.Y_TO_X, Verdict.X_TO_Y, Verdict.Y_TO_X]
    assert run_replicate(SMALL, "case1", "exp", 5000, 0).truth is Verdict.NO_EDGE


def test_replicate_is_independent_of_grid_shape():
    a = run_replicate(SMALL, "case2", "exp", 5000, 3)
    b = run_replicate(replace(SMALL, replicates=50, alphas=(0.01,)), "case2", "exp", 5000, 3)
    np.testing.assert_array_equal(a.evidence.replicates, b.evidence.replicates)


def test_records_shape(small_cells):
    records = records_from(small_cells, SMALL)
    assert len(records) == 2 * 3
    for rec in records:
        assert 0.0 <= rec.accuracy <= 1.0
        assert len(rec.verdicts) == SMALL.replicates
        if rec.case == "case1":
            assert rec.type2 is None and rec.type1 is not None
        else:
            assert rec.type1 is None and rec.type2 is not None


def test_single_replicate_accuracy_is_binary():
    grid = replace(SMALL, replicates=1, cases=("case2",))
    for rec in records_from(simulate_grid(grid), grid):
        assert rec.accuracy in (0.0, 1.0)


def test_alpha_one_edge_rates(small_cells):
    rows = [r for r in type_error_curves(SMALL, small_cells) if r.alpha == 1.0 and r.test == "edge"]
    assert {r.case: (r.type1, r.type2) for r in rows} == {"case1": (1.0, None), "case2": (None, 0.0)}


def test_direction_curve_rows(small_cells):
    rows = [r for r in type_error_curves(SMALL, small_cells) if r.test == "direction"]
    assert len(rows) == len(SMALL.alphas)
    assert all(r.case == "case2" for r in rows)
    assert all(0.0 <= r.type1 <= 1.0 and 0.0 <= r.type2 <= 1.0 for r in rows)


def test_worker_count_does_not_change_results(tmp_path):
    grid = replace(SMALL, replicates=3)
    one = records_from(simulate_grid(grid, workers=1), grid)
    two = records_from(simulate_grid(grid, workers=2), grid)
    export_results(one, tmp_path / "a.csv")
    export_results(two, tmp_path / "b.csv")
    assert _without_seconds(tmp_path / "a.csv") == _without_seconds(tmp_path / "b.csv")
    assert [r.verdicts for r in one] == [r.verdicts for r in two]


def test_full_case2_row_count(small_cells):
    grid = replace(SMALL, cases=("case2",), sample_sizes=(5000,))
    case2 = [c for c in small_cells if c.case == "case2"]
    assert len(records_from(case2, grid)) == len(grid.families) * len(grid.sample_sizes) * len(grid.alphas)


def test_export_round_trip(small_cells, tmp_path):
    records = records_from(small_cells, SMALL)
    path = export_results(records, tmp_path / "results.csv")
    back = read_results(path)
    assert [(r.case, r.family, r.n, r.alpha, r.replicates, r.accuracy, r.type1, r.type2)
            for r in back] == [(r.case, r.family, r.n, r.alpha, r.replicates,
                                float(f"{r.accuracy:.6g}"), r.type1, r.type2) for r in records]
    export_results(back, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_export_empty(tmp_path):
    path = export_results([], tmp_path / "empty.csv")
    assert path.read_text() == ",".join(RESULT_HEADER) + "\n"
    path = export_curves([], tmp_path / "curves.csv")
    assert path.read_text() == ",".join(CURVE_HEADER) + "\n"


def test_export_unwritable(tmp_path):
    with pytest.raises(OSError):
        export_results([], tmp_path / "missing" / "results.csv")


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_results(path)


def test_float_formatting(small_cells, tmp_path):
    export_results(records_from(small_cells, SMALL), tmp_path / "r.csv")
    rows = list(csv.DictReader(io.StringIO((tmp_path / "r.csv").read_text())))
    assert {row["alpha"] for row in rows} == {"0.05", "0.0001", "1"}
    assert all(row["type2"] == "" for row in rows if row["case"] == "case1")


def test_grid_from_mapping():
    section = {
        "cases": "case1, case2", "families": "exp", "sample_sizes": "5000",
        "replicates": "2", "alphas": "0.05,0.0001", "master_seed": "3", "B": "10",
    }
    grid = grid_from_mapping(section)
    assert grid.cases == ("case1", "case2") and grid.B == 10 and grid.alphas == (0.05, 1e-4)
    del section["master_seed"]
    with pytest.raises(KeyError, match="master_seed"):
        grid_from_mapping(section)


@pytest.mark.parametrize("name", ["paper_full", "paper_smoke"])
def test_shipped_configs(name):
    assert shipped_config(name).is_file()
    grid = grid_from_mapping(load_config(name))
    assert set(grid.families) == {"exp", "gamma3", "gumbel"}
    assert grid.alphas == (0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001)
    with pytest.raises(FileNotFoundError):
        shipped_config("nope")


def test_paper_full_grid():
    grid = grid_from_mapping(load_config("paper_full"))
    assert grid.sample_sizes == (5000, 10000, 50000, 100000)
    assert grid.replicates == 100
    smoke = grid_from_mapping(load_config("paper_smoke"))
    assert smoke.replicates == 10 and max(smoke.sample_sizes) <= 10000
