import csv
import io
import json
import subprocess
import sys

import pytest

from ulbound.bounds import dgs_bound
from ulbound.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bound_text(capsys):
    code, out, _ = run(capsys, "bound", "--n", "4", "--N", "24", "--potential", "newton")
    assert code == 0
    assert "ULB (newton:4) = 333" in out
    assert "certificate: ok" in out


def test_bound_json_schema(capsys):
    code, out, _ = run(capsys, "bound", "--n", "4", "--N", "24", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["ulb"] == pytest.approx(333, abs=1e-9)
    assert d["tau"] == 5 and len(d["nodes"]) == 3 and d["verified"] is True
    assert set(d["feasibility"]) >= {"f_le_h", "gegenbauer_nonneg", "max_violation"}


def test_bound_antipodal(capsys):
    code, out, _ = run(capsys, "bound", "--n", "4", "--N", "2", "--format", "json")
    assert code == 0 and json.loads(out)["ulb"] == pytest.approx(0.5)


def test_bound_simplex_gauss_matches_energy(capsys):
    _, out, _ = run(capsys, "bound", "--n", "3", "--N", "4", "--potential", "gauss", "--format", "json")
    bound = json.loads(out)["ulb"]
    _, out, _ = run(capsys, "energy", "--code", "simplex", "--n", "3", "--potential", "gauss", "--format", "json")
    assert json.loads(out)["energy"] == pytest.approx(bound, rel=1e-10)


def test_table_rows_and_reference(capsys, tmp_path):
    ref = tmp_path / "ref.csv"
    ref.write_text("N,energy\n24,334\n")
    code, out, _ = run(capsys, "table", "--n", "4", "--N-range", "5:64", "--reference", str(ref), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 60
    row24 = next(r for r in rows if r["N"] == "24")
    assert float(row24["ULB"]) == pytest.approx(333) and float(row24["gap"]) == pytest.approx(1)
    assert next(r for r in rows if r["N"] == "25")["gap"] == ""


def test_csv_has_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "bound", "--n", "4", "--N", "24", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["i", "alpha", "rho"]
    assert rows[3][1] == "0.474950489807"


def test_curve(capsys):
    code, out, _ = run(capsys, "curve", "--n", "4", "--tau-max", "6", "--steps", "300", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["points"][0]["L"] == pytest.approx(2.0)
    assert d["points"][-1]["L"] == pytest.approx(dgs_bound(4, 7), rel=1e-9)
    vals = [p["L"] for p in d["points"]]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert [j["D"] for j in d["junctions"]] == [dgs_bound(4, t + 1) for t in range(1, 7)]


def test_curve_needs_range(capsys):
    code, _, err = run(capsys, "curve", "--n", "4")
    assert code == 1 and "--s-max" in err


def test_testfn(capsys):
    code, out, _ = run(capsys, "testfn", "--n", "4", "--N", "24", "--j-max", "20", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["Q"]["8"] < 0 and d["Q"]["9"] < 0
    assert {8, 9} <= set(d["negative_js"])


def test_testfn_600_cell_size(capsys):
    _, out, _ = run(capsys, "testfn", "--n", "4", "--N", "120", "--j-max", "20", "--format", "json")
    assert {14, 15, 17} <= set(json.loads(out)["negative_js"])


def test_verdict(capsys):
    code, out, _ = run(capsys, "verdict", "--n", "10", "--N", "40")
    assert code == 0
    assert "j0=10" in out
    assert "LP-optimal at degree 3" in out
    _, out, _ = run(capsys, "verdict", "--n", "10", "--N", "40", "--format", "json")
    d = json.loads(out)
    assert d["j0"] == 10 and sorted(map(int, d["Q"])) == [4, 5, 6, 7, 8, 9]


def test_energy_d4(capsys):
    code, out, _ = run(capsys, "energy", "--code", "d4", "--potential", "newton", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["energy"] == pytest.approx(334, abs=1e-9) and d["gap"] == pytest.approx(1)


def test_energy_file_log_warns(capsys, caplog, tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n")
    code, out, _ = run(capsys, "energy", "--code", f"file:{path}", "--potential", "log", "--format", "json")
    assert code == 0
    assert any("negative" in r.getMessage() for r in caplog.records)
    energy = json.loads(out)["energy"]
    # 4 antipodal ordered pairs at -ln(2)/2, 8 orthogonal ordered pairs at 0
    assert energy == pytest.approx(-2 * 0.6931471805599453, rel=1e-12)


def test_improve(capsys):
    code, out, _ = run(capsys, "improve", "--n", "4", "--N", "24", "--potential", "newton", "--j", "8", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert 333 < d["improved"] <= 334 and d["certified"]


def test_improve_rejects_nonnegative_q(capsys):
    code, _, err = run(capsys, "improve", "--n", "4", "--N", "24", "--j", "6")
    assert code == 1 and "not negative" in err


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--n", "4"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    code, _, _ = run(capsys, "bound", "--n", "4", "--N", "24", "--potential", "nope")
    assert code == 1


def test_io_errors_exit_three(capsys, tmp_path):
    code, _, _ = run(capsys, "energy", "--code", f"file:{tmp_path / 'missing.txt'}")
    assert code == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0\n0 0.5\n")
    code, _, err = run(capsys, "energy", "--code", f"file:{bad}")
    assert code == 3 and "line 2" in err


def test_certificate_failure_exit_two(capsys):
    # a step far past the admissible epsilon pushes f above h
    code, out, _ = run(capsys, "improve", "--n", "4", "--N", "24", "--j", "8", "--eps", "1")
    assert code == 2 and "FAILED" in out


def test_tolerance_override(capsys, monkeypatch):
    # a loose tolerance swallows the small negative Q_j into "zero"
    monkeypatch.setenv("ULB_TOL", "0.1")
    code, out, _ = run(capsys, "testfn", "--n", "4", "--N", "24", "--format", "json")
    assert code == 0 and json.loads(out)["negative_js"] == []
    code, out, _ = run(capsys, "verdict", "--n", "4", "--N", "24", "--format", "json")
    assert json.loads(out)["negative_js"] == []


def test_bad_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("ULB_TOL", "abc")
    code, _, _ = run(capsys, "bound", "--n", "4", "--N", "24")
    assert code == 1


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "bound", "--n", "4", "--N", "24", "--format", "json", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["ulb"] == pytest.approx(333)


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--n", "4", "--N-range", "5:30", "--format", "csv"],
        ["verdict", "--n", "14", "--N", "64", "--format", "json"],
        ["curve", "--n", "4", "--tau-max", "4", "--steps", "50", "--format", "csv"],
    ],
)
def test_deterministic_subprocess(argv):
    cmd = [sys.executable, "-m", "ulbound.cli"] + argv
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
