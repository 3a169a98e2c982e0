import json
import subprocess
import sys

import pytest

from wignerlab.cli import main
from wignerlab.protoparse import shipped_programs
from wignerlab.runner import SCENARIOS


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert out.split() == list(SCENARIOS)
    assert len(out.split()) == 8


def test_run_fr_premeasure(capsys):
    code, out, err = run(capsys, "run", "fr", "--policy", "premeasure")
    assert code == 0
    body = json.loads(out)
    assert body["derived_quantities"]["p_ok_okbar"] == pytest.approx(1 / 12, abs=1e-12)
    assert "assertions passed" in err


def test_run_ghz_angles(capsys):
    code, out, _ = run(capsys, "run", "ghz", "--phi", "0,1.5707963,1.5707963")
    assert code == 0
    assert json.loads(out)["derived_quantities"]["correlation"] == pytest.approx(-1.0, abs=1e-12)
    code, out, _ = run(capsys, "run", "ghz", "--phi", "0,pi/2,pi/2", "--agents", "wigner,friend,friend")
    assert code == 0
    assert json.loads(out)["derived_quantities"]["correlation"] == pytest.approx(-1.0, abs=1e-12)


def test_run_wig_file(capsys):
    code, out, _ = run(capsys, "run", str(shipped_programs()["eraser"]))
    assert code == 0
    assert json.loads(out)["scenario"] == "eraser"


def test_assertion_failure_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.wig"
    bad.write_text(
        "register a qubit;\nstate p = (|0> + |1>)/sqrt(2) on a;\n"
        "basis Z over a = computational;\nmeasure a in Z as o;\nassert prob(o=0) == 1/10 tol 1e-9;\n"
    )
    code, _, err = run(capsys, "run", str(bad))
    assert code == 1
    assert "FAIL" in err


def test_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.wig"
    bad.write_text("register a qubit;\nmeasure a in x as o;\n")
    code, out, err = run(capsys, "run", str(bad))
    assert code == 2
    assert out == ""
    assert f"{bad}:2:14: error: unknown basis 'x'" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "nope"],
        ["run", "fr", "--leak", "2"],
        ["run", "fr", "--policy", "maybe"],
        ["run", "ghz", "--phi", "0,1"],
        ["run", "fr", "--format", "csv"],
        ["run", "fr", "--m", "a:b"],
        ["run", "missing.wig"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_sweep_csv_to_file(tmp_path, capsys):
    out = tmp_path / "cut.csv"
    code, stdout, _ = run(capsys, "sweep", "cut-scaling", "--m", "1:12", "--leak", "0.1", "--format", "csv", "--out", str(out))
    assert code == 0 and stdout == ""
    lines = out.read_text().splitlines()
    assert lines[0] == "m,p,visibility,seconds"
    assert len(lines) == 13


def test_same_seed_same_bytes(capsys):
    _, first, _ = run(capsys, "run", "concordant", "--seed", "7")
    _, second, _ = run(capsys, "run", "concordant", "--seed", "7")
    assert first == second


def test_bench_small_budget(capsys):
    code, out, _ = run(capsys, "bench", "--m", "2,4", "--format", "csv", "--timings")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "m,p,visibility,seconds"
    assert all(r.split(",")[3] for r in rows[1:])


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "wignerlab", "list"], capture_output=True, text=True)
    assert done.returncode == 0
    assert done.stdout.split()[0] == "fr"
