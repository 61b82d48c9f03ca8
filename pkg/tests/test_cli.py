import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from bellbound.behavior import Behavior, apply_loss
from bellbound.cli import main
from bellbound.inequality import BellFunctional, build_bipartite
from bellbound.strategies import LocalModel, model_behavior, modular_box_bipartite

from conftest import CHSH


@pytest.fixture
def chsh_files(tmp_path):
    assert main(["construct", "bipartite", "--inputs", "2,2", "--out-dir", str(tmp_path)]) == 0
    return tmp_path / "functional.json", tmp_path / "box.json"


def test_construct_outputs(chsh_files, capsys):
    func, box = chsh_files
    assert BellFunctional.from_json(json.loads(func.read_text())) == build_bipartite(2, 2)
    assert Behavior.from_json(json.loads(box.read_text())) == modular_box_bipartite(2, 2, 2)


def test_construct_multi(tmp_path, capsys):
    assert main(["construct", "multi", "--inputs", "2,2,2", "--out-dir", str(tmp_path)]) == 0
    assert "P=3 penalty=729" in capsys.readouterr().out


def test_construct_bad_arity(tmp_path, capsys):
    assert main(["construct", "bipartite", "--inputs", "2,2,2", "--out-dir", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_check_ns(chsh_files, tmp_path, capsys):
    _, box = chsh_files
    assert main(["check-ns", str(box)]) == 0
    table = np.full(CHSH.shape, Fraction(0), dtype=object)
    for x in (1, 2):
        for y in (1, 2):
            table[x - 1, y - 1, y % 2, 0] = Fraction(1)
    bad = tmp_path / "signal.json"
    bad.write_text(json.dumps(Behavior(CHSH, table).to_json()))
    capsys.readouterr()
    assert main(["check-ns", str(bad)]) == 2
    assert "FAILED worst violation 1" in capsys.readouterr().out


def test_bell_value(chsh_files, capsys):
    func, box = chsh_files
    assert main(["bell-value", str(func), str(box), "--eta", "7/10"]) == 0
    assert "value=7/100" in capsys.readouterr().out
    assert main(["bell-value", str(func), str(box), "--eta", "0.5"]) == 0
    assert "value=-1/4" in capsys.readouterr().out


def test_lhv_max_and_shards(chsh_files, tmp_path, capsys):
    func, _ = chsh_files
    assert main(["lhv-max", str(func)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("max=0 ")
    assert "I <= 0" in out
    parts = []
    for k in range(3):
        assert main(["lhv-max", str(func), "--shard", f"{k}/3"]) == 0
        part = tmp_path / f"part{k}.json"
        part.write_text(capsys.readouterr().out)
        parts.append(str(part))
    assert main(["lhv-max", str(func), "--merge", *parts]) == 0
    assert capsys.readouterr().out == out


def test_lhv_max_budget_env(chsh_files, monkeypatch, capsys):
    func, _ = chsh_files
    monkeypatch.setenv("BELLBOUND_BUDGET", "5")
    assert main(["lhv-max", str(func)]) == 1
    assert "budget" in capsys.readouterr().err


def test_local_test_and_degrade(chsh_files, tmp_path, capsys):
    _, box = chsh_files
    model = tmp_path / "model.json"
    assert main(["local-test", str(box), "--eta", "2/3", "-o", str(model)]) == 0
    witness = tmp_path / "witness.json"
    assert main(["local-test", str(box), "--eta", "7/10", "-o", str(witness), "--no-prepass"]) == 2
    assert Fraction(json.loads(witness.read_text())["gap"]) > 0
    out = tmp_path / "half.json"
    assert main(["degrade", str(model), "--eta1", "1/2", "--eta2", "2/3", "-o", str(out)]) == 0
    m = LocalModel.from_json(json.loads(out.read_text()))
    assert model_behavior(m) == apply_loss(modular_box_bipartite(2, 2, 2), Fraction(1, 2))


def test_critical_eta(chsh_files, tmp_path, capsys):
    _, box = chsh_files
    out = tmp_path / "bracket.json"
    assert main(["critical-eta", str(box), "--tol", "1/64", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert Fraction(data["lower"]) <= Fraction(2, 3) <= Fraction(data["upper"])
    assert Fraction(data["width"]) <= Fraction(1, 64)


def test_critical_eta_rejects_zero_tol(chsh_files):
    _, box = chsh_files
    with pytest.raises(SystemExit):
        main(["critical-eta", str(box), "--tol", "0"])


def test_bounds_table_csv(capsys):
    assert main(["bounds-table", "--m-list", "4,16", "--n-max", "5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["M", "N", "lower", "upper", "conjectural"]
    assert len(rows) == 1 + 2 * 4
    assert rows[1][:2] == ["4", "2"]
    assert float(rows[1][2]) == pytest.approx(6 / 15, abs=1e-12)
    assert rows[1][2] == rows[1][3]
    assert main(["bounds-table", "--m-list", "2", "--n-max", "3", "--exact"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[1] == ["2", "2", "2/3", "2/3", "false"]
    assert rows[2] == ["2", "3", "3/5", "(3/7)^(1/2)", "false"]


def test_missing_file_is_an_error(capsys):
    assert main(["check-ns", "/nonexistent/behavior.json"]) == 1


def test_console_entry_point_help():
    out = subprocess.run(
        [sys.executable, "-m", "bellbound.cli", "--help"], capture_output=True, text=True, check=True
    ).stdout
    for name in ("construct", "check-ns", "bell-value", "lhv-max", "local-test", "critical-eta", "degrade", "bounds-table"):
        assert name in out
