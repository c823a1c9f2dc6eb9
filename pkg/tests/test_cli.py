import json
import subprocess
import sys
import time

import numpy as np
import pytest

from cumpair.bench import RESULT_HEADER
from cumpair.cli import DEFAULT_KEYS, load_dataset, main
from cumpair.cumulants import cumulant_profile
from cumpair.model import PairModel, Structure, family_spec, random_model, sample


def _generate(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["generate", "--out", str(out), *extra]) == 0
    return out


def _profile_lines(text):
    rows = [line.split(",") for line in text.splitlines() if line and line[0].isdigit()]
    return {(int(i), int(j)): float(v) for i, j, v in rows}


def test_generate_writes_rows(tmp_path):
    out = _generate(tmp_path, "d.csv", "--case", "confounder-only", "--family", "exp",
                    "--n", "5000", "--seed", "7")
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# cumpair generate ")
    assert lines[1] == "X,Y"
    assert len(lines) == 5002
    resolved = json.loads(lines[0].split(" ", 3)[3])
    assert resolved["seed"] == 7 and resolved["n"] == 5000 and resolved["eta"] is None


def test_generate_deterministic(tmp_path):
    args = ("--case", "x-to-y", "--n", "500", "--seed", "3")
    first = _generate(tmp_path, "a.csv", *args).read_bytes()
    assert _generate(tmp_path, "a.csv", *args).read_bytes() == first
    other = _generate(tmp_path, "a.csv", "--case", "x-to-y", "--n", "500", "--seed", "4")
    assert other.read_bytes() != first


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CUMPAIR_SEED", "3")
    from_env = _generate(tmp_path, "a.csv", "--n", "200").read_bytes()
    monkeypatch.delenv("CUMPAIR_SEED")
    assert _generate(tmp_path, "a.csv", "--n", "200", "--seed", "3").read_bytes() == from_env


def test_generate_gaussian_warns(tmp_path):
    with pytest.warns(UserWarning, match="Gaussian"):
        _generate(tmp_path, "g.csv", "--family", "gaussian", "--n", "100")


def test_generate_nonlinear(tmp_path):
    lin = load_dataset(_generate(tmp_path, "l.csv", "--case", "case2", "--n", "300", "--seed", "1"))
    nl = load_dataset(_generate(tmp_path, "n.csv", "--case", "case2", "--n", "300", "--seed", "1",
                                "--nonlinear"))
    assert not np.array_equal(lin.y, nl.y)


def test_generate_explicit_coefficients(tmp_path):
    path = _generate(tmp_path, "e.csv", "--case", "x-to-y", "--lambda1", "1", "--lambda2", "1",
                     "--eta", "1", "--n", "400", "--seed", "2")
    model = PairModel(Structure.X_TO_Y, 1.0, 1.0, 1.0)
    ref = sample(model, 400, (2, 1))
    data = load_dataset(path)
    np.testing.assert_array_equal(data.x, ref.x)
    np.testing.assert_array_equal(data.y, ref.y)


def test_round_trip_matches_in_memory(tmp_path, capsys):
    path = _generate(tmp_path, "d.csv", "--case", "case2", "--family", "gumbel", "--n", "2000",
                     "--seed", "5")
    spec = family_spec("gumbel")
    drawn = random_model("case2", spec, (5, 0))
    ref = sample(drawn, 2000, (5, 1))
    capsys.readouterr()
    assert main(["cumulants", str(path)]) == 0
    printed = _profile_lines(capsys.readouterr().out)
    expected = cumulant_profile(ref, DEFAULT_KEYS)
    assert printed == dict(expected)


def test_cumulants_custom_keys(tmp_path, capsys):
    path = _generate(tmp_path, "d.csv", "--n", "1000")
    capsys.readouterr()
    assert main(["cumulants", str(path), "--keys", "2,2", "--keys", "1,1"]) == 0
    assert set(_profile_lines(capsys.readouterr().out)) == {(2, 2), (1, 1)}
    assert main(["cumulants", str(path), "--keys", "4,2"]) == 1


def test_cumulants_keys_from_config(tmp_path, capsys):
    path = _generate(tmp_path, "d.csv", "--n", "1000")
    cfg = tmp_path / "run.ini"
    cfg.write_text("[cumulants]\nkeys = 3,0 0,3\n")
    capsys.readouterr()
    assert main(["cumulants", str(path), "--config", str(cfg)]) == 0
    assert set(_profile_lines(capsys.readouterr().out)) == {(3, 0), (0, 3)}


def test_cumulants_exponential_column(tmp_path, capsys):
    path = _generate(tmp_path, "d.csv", "--case", "confounder-only", "--lambda1", "1.1",
                     "--lambda2", "0.9", "--n", "1000000", "--seed", "1")
    capsys.readouterr()
    assert main(["cumulants", str(path), "--keys", "3,0"]) == 0
    c30 = _profile_lines(capsys.readouterr().out)[(3, 0)]
    assert c30 == pytest.approx(2 * 1.1**3 + 2, rel=0.05)


def test_malformed_row_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# comment\nX,Y\n1.0,2.0\n3.0,oops\n")
    assert main(["cumulants", str(bad)]) == 1
    assert "line 4" in capsys.readouterr().err
    bad.write_text("X,Y\n1.0,2.0,3.0\n")
    assert main(["discover", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_missing_header(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,2.0\n")
    assert main(["cumulants", str(bad)]) == 1
    assert "header" in capsys.readouterr().err


def test_missing_input_file(tmp_path, capsys):
    assert main(["discover", str(tmp_path / "nope.csv")]) == 1


@pytest.fixture(scope="module")
def case2_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "case2.csv"
    assert main(["generate", "--case", "case2", "--n", "100000", "--seed", "17", "--out", str(path)]) == 0
    return path


def test_discover_report(case2_file, tmp_path):
    report = tmp_path / "report.json"
    code = main(["discover", str(case2_file), "--direction-rule", "pvalue", "--report", str(report)])
    doc = json.loads(report.read_text())
    assert code == (0 if doc["verdict"] in ("NoEdge", "XtoY", "YtoX") else 2)
    assert doc["verdict"] == "XtoY"
    assert doc["config"]["alpha"] == 1e-4 and doc["config"]["B"] == 30
    assert len(doc["bootstrap"]["edge_statistic"]) == 30
    assert set(doc["direction_tests"]) == {"x_to_y", "y_to_x"}
    assert len(doc["ratios"]) == 2


def test_discover_deterministic(case2_file, tmp_path):
    report = tmp_path / "a.json"
    main(["discover", str(case2_file), "--seed", "4", "--report", str(report)])
    first = report.read_bytes()
    main(["discover", str(case2_file), "--seed", "4", "--report", str(report)])
    assert report.read_bytes() == first


def test_discover_inconclusive_exit_code(case2_file, tmp_path):
    # alpha = 1 rejects every null, so both directions are rejected.
    report = tmp_path / "r.json"
    assert main(["discover", str(case2_file), "--alpha", "1", "--report", str(report)]) == 2
    assert json.loads(report.read_text())["verdict"] == "InconclusiveBothRejected"


def test_discover_case1_reports_loadings(tmp_path, capsys):
    path = _generate(tmp_path, "c1.csv", "--case", "case1", "--n", "100000", "--seed", "18")
    capsys.readouterr()
    code = main(["discover", str(path)])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0 and doc["verdict"] == "NoEdge"
    coeffs = doc["confounder_coefficients"]
    assert coeffs["alpha1_hat"] > 0 and coeffs["alpha2_hat"] > 0


def test_discover_small_sample(tmp_path, capsys):
    path = _generate(tmp_path, "tiny.csv", "--case", "case2", "--n", "100", "--seed", "1")
    capsys.readouterr()
    code = main(["discover", str(path)])
    out = capsys.readouterr().out
    assert code in (0, 2)
    assert any("below 5000" in d for d in json.loads(out)["diagnostics"])


def test_config_file_and_flag_override(case2_file, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[discover]\nalpha = 0.05\nB = 12\n")
    report = tmp_path / "r.json"
    main(["discover", str(case2_file), "--config", str(cfg), "--B", "10", "--report", str(report)])
    doc = json.loads(report.read_text())
    assert doc["config"]["alpha"] == 0.05 and doc["config"]["B"] == 10
    assert len(doc["bootstrap"]["edge_statistic"]) == 10


def test_bench_smoke_under_a_minute(tmp_path):
    start = time.perf_counter()
    assert main(["bench", "--config", "paper_smoke", "--out", str(tmp_path)]) == 0
    assert time.perf_counter() - start < 60
    header = (tmp_path / "results.csv").read_text().splitlines()[0]
    assert header == ",".join(RESULT_HEADER)
    assert (tmp_path / "curves.csv").is_file()
    resolved = (tmp_path / "resolved_config.ini").read_text()
    assert "master_seed = 2024" in resolved


def test_bench_missing_key(tmp_path, capsys):
    cfg = tmp_path / "grid.ini"
    cfg.write_text("[bench]\ncases = case1\nfamilies = exp\nsample_sizes = 5000\nreplicates = 2\n"
                   "alphas = 0.05\n")
    assert main(["bench", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "master_seed" in capsys.readouterr().err


def test_bench_scale_and_seed(tmp_path):
    cfg = tmp_path / "grid.ini"
    cfg.write_text("[bench]\ncases = case1\nfamilies = exp\nsample_sizes = 5000\nreplicates = 4\n"
                   "alphas = 0.05\nmaster_seed = 1\n")
    assert main(["bench", "--config", str(cfg), "--scale", "2", "--seed", "8",
                 "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "results.csv").read_text().splitlines()
    assert rows[1].startswith("case1,exp,2500,0.05,2,")
    assert "master_seed = 8" in (tmp_path / "o" / "resolved_config.ini").read_text()


def test_module_entry_point(tmp_path):
    out = tmp_path / "d.csv"
    res = subprocess.run([sys.executable, "-m", "cumpair", "generate", "--n", "50", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert load_dataset(out).n == 50
