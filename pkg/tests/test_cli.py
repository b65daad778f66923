import json

import pytest

from nkphase.cli import main
from nkphase.cnf import read_dimacs
from nkphase.core import NKInstance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_reduce_solve_pipeline(tmp_path, capsys):
    inst_path, cnf_path, stats_path = tmp_path / "i.json", tmp_path / "f.cnf", tmp_path / "s.json"
    assert run(capsys, "generate", "--n", "40", "--k", "2", "--z", "2.5", "--seed", "3",
               "--out", str(inst_path))[0] == 0
    inst = NKInstance.load(inst_path)
    assert inst.n == 40 and inst.k == 2
    assert run(capsys, "reduce", "--in", str(inst_path), "--out", str(cnf_path))[0] == 0
    assert read_dimacs(cnf_path).num_vars == 40
    code, out, _ = run(capsys, "solve", "--in", str(cnf_path), "--stats", str(stats_path))
    assert code in (10, 20)
    assert out.startswith("s SATISFIABLE" if code == 10 else "s UNSATISFIABLE")
    assert json.loads(stats_path.read_text())["status"] in ("SAT", "UNSAT")


def test_generate_to_stdout_is_deterministic(capsys):
    a = run(capsys, "generate", "--n", "10", "--k", "2", "--model", "uniform", "--p", "0.2")[1]
    b = run(capsys, "generate", "--n", "10", "--k", "2", "--model", "uniform", "--p", "0.2")[1]
    assert a == b and json.loads(a)["n"] == 10


def test_generate_missing_value_is_an_error(capsys):
    code, _, err = run(capsys, "generate", "--n", "10", "--k", "2", "--model", "uniform")
    assert code == 2 and "--p" in err
    code, _, err = run(capsys, "generate", "--n", "10", "--k", "2", "--z", "9")
    assert code == 2


def test_reduce_to_stdout(tmp_path, capsys):
    path = tmp_path / "i.json"
    main(["generate", "--n", "6", "--k", "1", "--z", "1", "--out", str(path)])
    code, out, _ = run(capsys, "reduce", "--in", str(path))
    assert code == 0 and "p cnf 6 6" in out


def test_analyze_report(tmp_path, capsys):
    path = tmp_path / "i.json"
    main(["generate", "--n", "30", "--k", "2", "--z", "8", "--out", str(path)])
    code, out, _ = run(capsys, "analyze", "--in", str(path))
    rep = json.loads(out)
    assert code == 0
    assert rep["all_zero_function"] == 0
    assert rep["twosat"]["satisfiable"] is False
    assert rep["decomposition"]["soluble"] is False


def test_analyze_capacity_exceeded(tmp_path, capsys):
    path = tmp_path / "i.json"
    main(["generate", "--n", "60", "--k", "2", "--z", "3", "--out", str(path)])
    rep = json.loads(run(capsys, "analyze", "--in", str(path), "--report", "components", "--cap", "2")[1])
    assert "capacity_exceeded" in rep["decomposition"]


def test_solve_exit_codes(tmp_path, capsys):
    sat, unsat = tmp_path / "s.cnf", tmp_path / "u.cnf"
    sat.write_text("p cnf 2 1\n1 -2 0\n")
    unsat.write_text("p cnf 1 2\n1 0\n-1 0\n")
    code, out, _ = run(capsys, "solve", "--in", str(sat))
    assert code == 10 and out.splitlines()[1].endswith(" 0")
    assert run(capsys, "solve", "--in", str(unsat))[0] == 20


def test_solve_bad_dimacs(tmp_path, capsys):
    bad = tmp_path / "b.cnf"
    bad.write_text("p cnf 1 1\n2 0\n")
    code, _, err = run(capsys, "solve", "--in", str(bad))
    assert code == 2 and "line 2" in err


def test_module_is_unsat(tmp_path, capsys):
    path = tmp_path / "m.cnf"
    assert run(capsys, "module", "--p", "2", "--out", str(path))[0] == 0
    assert len(read_dimacs(path).clauses) == 16
    assert run(capsys, "solve", "--in", str(path))[0] == 20


def test_sweep_writes_reports(tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = run(capsys, "sweep", "--k", "2", "--n", "64", "--z", "2.8,3.0",
                          "--trials", "3", "--seed", "7", "--out", str(out), "--svg", "--workers", "1")
    assert code == 0
    assert (out / "summary.csv").read_text().count("\n") == 3
    assert (out / "records.jsonl").read_text().count("\n") == 6
    assert (out / "fractions.svg").exists() and "meta.json" in stdout


def test_sweep_requires_values(capsys):
    with pytest.raises(SystemExit):
        main(["sweep", "--n", "64", "--out", "x"])


@pytest.mark.parametrize("which", ["all-zero", "conflict", "module"])
def test_mc_check(which, capsys):
    code, out, _ = run(capsys, "mc-check", "--which", which, "--samples", "20000", "--n", "12")
    rows = json.loads(out)
    assert rows and all("z_score" in r for r in rows)
    assert code in (0, 1)
