"""Command-line behavior: config validation, exit codes, cheap subcommands."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from petctraffic import cli
from petctraffic.cli import (ConfigError, EXIT_CONFIG, EXIT_OK,
                             EXIT_TRANSPORT, EXIT_UNDECIDED, load_config,
                             main, solver_command)

F = Fraction


def open_default() -> str:
    import importlib.resources

    return (importlib.resources.files("petctraffic.data")
            / "casestudy.json").read_text()


def test_default_config_loads_exact():
    cfg = load_config(None)
    assert cfg["h"] == F(1, 10)
    assert cfg["r"] == F(1, 10)
    assert cfg["rho"] == F(4, 5)
    assert cfg["A"][1][1] == F(3)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    nolist = tmp_path / "nolist.json"
    nolist.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(nolist)


def test_config_field_validation(tmp_path):
    base = json.loads(open_default())
    missing = dict(base)
    del missing["A"]
    p = tmp_path / "m.json"
    p.write_text(json.dumps(missing))
    with pytest.raises(ConfigError):
        load_config(p)
    # trigger data must come as Q_trig xor {Q_lyap, rho}
    both = dict(base)
    both["Q_trig"] = [[0] * 4] * 4
    p.write_text(json.dumps(both))
    with pytest.raises(ConfigError):
        load_config(p)
    partial = dict(base)
    del partial["rho"]
    p.write_text(json.dumps(partial))
    with pytest.raises(ConfigError):
        load_config(p)


def test_solver_command_resolution():
    assert solver_command({"solver": {}}) is None
    assert solver_command({}) is None
    cmd = solver_command({"solver": {"path": "/opt/z3", "args": ["-smt2"]}})
    assert cmd == ["/opt/z3", "-smt2"]


def test_exit_code_config(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{}")
    assert main(["discretize", "--config", str(p)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_discretize_default_config(capsys):
    assert main(["discretize"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "h_P = 2/5 (0.4 s)" in out
    assert "k_lo = 1" in out
    assert "M(6)" in out and "N(1)" in out


def test_exit_code_transport(tmp_path, capsys):
    base = json.loads(open_default())
    base["solver"] = {"path": "/nonexistent/solver-binary"}
    p = tmp_path / "t.json"
    p.write_text(json.dumps(base))
    assert main(["contraction", "--config", str(p)]) == EXIT_TRANSPORT
    assert "solver transport error" in capsys.readouterr().err


def test_exit_code_undecided(tmp_path, capsys):
    # a "solver" that always answers unknown forces the undecided path
    base = json.loads(open_default())
    base["solver"] = {"path": "echo", "args": ["unknown"]}
    p = tmp_path / "u.json"
    p.write_text(json.dumps(base))
    assert main(["contraction", "--config", str(p)]) == EXIT_UNDECIDED
    assert "could not decide" in capsys.readouterr().err


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])
