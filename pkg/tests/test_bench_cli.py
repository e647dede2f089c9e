import json
import statistics

import pytest

import pcst_maxsum.bench as bench
from conftest import path3
from pcst_maxsum import BenchRow, RSpec, SolverConfig, rows_from_csv, rows_to_csv, run_bench
from pcst_maxsum.bench import suite_from_dict
from pcst_maxsum.cli import main
from pcst_maxsum.formats import save_instance


def test_csv_round_trip():
    rows = [BenchRow("a", "R n=8", 8, 12, 3.25, 3.0, 8.333333333333332, 40, 0.125, True, 0.5),
            BenchRow("b,quoted", "cls", 5, 4),
            BenchRow("c", "cls", 5, 4, error="ValueError: boom")]
    text = rows_to_csv(rows)
    assert text.splitlines()[0].startswith("name,cls,n,m,cost,bound,gap")
    assert rows_from_csv(text) == rows


def test_small_suite_with_oracle():
    rows, agg = run_bench([(RSpec(8, 2, 1.2, costs="uniform"), 20)])
    assert len(rows) == 20
    assert all(r.bound is not None and r.gap is not None for r in rows)
    assert all(r.gap >= -1e-9 for r in rows)
    assert statistics.median(r.gap for r in rows) == pytest.approx(0.0, abs=1e-9)
    (cls, summary), = agg.items()
    assert summary["instances"] == 20 and summary["failures"] == 0
    assert summary["mean_gap"] is not None
    assert all(0.0 <= r.solution_fraction <= 1.0 for r in rows)


def test_costs_are_reproducible():
    suite = [(RSpec(10, 3, 1.5), [3, 4, 5])]
    a, _ = run_bench(suite, SolverConfig(max_sweeps=3000))
    b, _ = run_bench(suite, SolverConfig(max_sweeps=3000))
    assert [r.cost for r in a] == [r.cost for r in b]


def test_malformed_suites_fail_before_running(monkeypatch):
    calls = []
    monkeypatch.setattr(bench, "solve_pcst", lambda *a, **k: calls.append(a))
    with pytest.raises(ValueError):
        suite_from_dict({"entries": []})
    with pytest.raises(ValueError):
        suite_from_dict({"entries": [{"spec": {"family": "R", "n": 10, "nu": 2, "lambda": 1},
                                      "seeds": 2},
                                     {"spec": {"family": "R", "bogus": 1}}]})
    with pytest.raises(ValueError):
        run_bench([(RSpec(10, 2, 1.0), 2), (RSpec(1, 2, 1.0), 1)])
    with pytest.raises(ValueError):
        run_bench([])
    assert calls == []


def test_failures_are_recorded_in_rows(monkeypatch):
    real = bench.solve_pcst

    def flaky(inst, cfg):
        if inst.name.endswith("_s1"):
            raise RuntimeError("solver blew up")
        return real(inst, cfg)

    monkeypatch.setattr(bench, "solve_pcst", flaky)
    rows, agg = run_bench([(RSpec(8, 2, 1.0), 3)])
    assert [r.failed for r in rows] == [False, True, False]
    assert "solver blew up" in rows[1].error
    assert next(iter(agg.values()))["failures"] == 1


@pytest.fixture
def p3_file(tmp_path):
    path = tmp_path / "p3.stp"
    save_instance(path3(), path)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cli_solve(capsys, p3_file):
    code, out = run_cli(capsys, "solve", p3_file)
    assert code == 0
    sol = json.loads(out)
    assert set(sol) >= {"parents", "depths", "cost", "converged", "sweeps"}
    assert sol["cost"] == 0.5
    code, out = run_cli(capsys, "solve", p3_file, "--root", "0", "--post", "both", "--stats")
    sol = json.loads(out)
    assert sol["cost"] == 3.0 and sol["stats"]["selection"] == "given"
    code, out = run_cli(capsys, "solve", p3_file, "--lambda", "0")
    assert json.loads(out)["cost"] == 0.0


def test_cli_generate_and_oracle(capsys, tmp_path):
    out_path = tmp_path / "g.json"
    spec = json.dumps({"family": "R", "n": 9, "nu": 2, "lambda": 1.2, "costs": "uniform"})
    assert main(["generate", spec, "--seed", "3", "--format", "json",
                 "--out", str(out_path)]) == 0
    code, out = run_cli(capsys, "oracle", str(out_path))
    opt = json.loads(out)
    assert code == 0 and opt["cost"] >= 0 and opt["root"] in opt["vertices"]
    code, out = run_cli(capsys, "solve", str(out_path))
    assert json.loads(out)["cost"] >= opt["cost"] - 1e-9


def test_cli_verify(capsys, p3_file):
    code, out = run_cli(capsys, "verify", p3_file, "--root", "0")
    rep = json.loads(out)
    assert code == 0
    assert rep["checks"]["optimality"]["preconditions_met"]
    assert rep["checks"]["lifting"]["pass"]
    assert rep["checks"]["subtree_optimality"]["pass"]


def test_cli_bench(capsys, tmp_path, monkeypatch):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({
        "entries": [{"spec": {"family": "R", "n": 8, "nu": 2, "lambda": 1.2}, "seeds": 3}],
        "config": {"max_sweeps": 3000}}))
    code, out = run_cli(capsys, "bench", str(suite))
    assert code == 0 and len(rows_from_csv(out)) == 3
    code, out = run_cli(capsys, "bench", str(suite), "--format", "json")
    assert len(json.loads(out)["rows"]) == 3

    def broken(inst, cfg):
        raise RuntimeError("nope")

    monkeypatch.setattr(bench, "solve_pcst", broken)
    code, out = run_cli(capsys, "bench", str(suite))
    assert code == 2 and all(r.failed for r in rows_from_csv(out))


def test_cli_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.stp"
    bad.write_text("33D32945 STP File, STP Format Version 1.0\nSECTION Graph\nNodes 2\n"
                   "Edges 1\nE 1 2 -1\nEND\nEOF\n")
    assert main(["solve", str(bad)]) == 1
    assert "negative cost at line 5" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.stp")]) == 1
    with pytest.raises(SystemExit):
        main(["frobnicate"])
