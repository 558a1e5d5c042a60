from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from sfdarboux.cli import main, matches_up_to_constant, parse_seed_range, read_sidecar
from sfdarboux.algebra import RatFn, X, Y

ROOT = Path(__file__).resolve().parents[1]


def test_seed_range():
    assert list(parse_seed_range("3..5")) == [3, 4, 5]
    assert list(parse_seed_range("7")) == [7]
    with pytest.raises(Exception):
        parse_seed_range("5..3")


def test_solve_writes_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["solve", "--ode", "-y", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["status"] == "success"
    assert "J = 1/2*y^2 + 1/2*z^2" in capsys.readouterr().out


def test_solve_parse_error_exit_code(capsys):
    assert main(["solve", "--ode", "2x"]) == 1
    assert "error" in capsys.readouterr().err


def test_check_command(capsys):
    assert main(["check", "--ode", "-y", "--integral", "y^2 + z^2"]) == 0
    assert main(["check", "--ode", "-y", "--integral", "y^2 + 2*z^2"]) == 1


def test_corpus_with_sidecar(tmp_path, capsys):
    (tmp_path / "a.ode").write_text("# comment\n-y\nz^2/y\n")
    (tmp_path / "a.expected").write_text("-\n1/(y*z)\n")
    assert read_sidecar(tmp_path / "a.expected") == [None, "1/(y*z)"]
    code = main(["corpus", "--dir", str(tmp_path), "--out", str(tmp_path / "reports")])
    text = capsys.readouterr().out
    assert "2/2 entries succeeded" in text, text
    assert code == 0
    assert len(list((tmp_path / "reports").glob("*.json"))) == 2


def test_matches_up_to_constant():
    assert matches_up_to_constant(RatFn(X.scale(3), Y), RatFn(X, Y))
    assert not matches_up_to_constant(RatFn(X, Y), RatFn(Y, X))


def test_oracle_command_small_range(capsys):
    assert main(["oracle", "--seeds", "1..1"]) == 0
    assert "1/1 certified" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sfdarboux", "check", "--ode", "-y", "--integral", "y^2 + z^2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "residual: 0" in res.stdout
