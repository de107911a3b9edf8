import json

import pytest

from slotflow.cli import EXIT_INFEASIBLE, EXIT_INVALID, EXIT_IO, EXIT_OK, run


def read(path):
    return json.loads((path / "summary.json").read_text())


def test_generate_then_solve(tmp_path, capsys):
    assert run(["generate", "--reference-day", "--out", str(tmp_path / "g")]) == EXIT_OK
    sched = tmp_path / "g" / "schedule.csv"
    assert run(["solve", "--schedule", str(sched), "--capacity", "900", "--out", str(tmp_path / "s")]) == EXIT_OK
    summary = read(tmp_path / "s")
    assert summary["optimized"]["tw"]["value"] == 0
    assert (tmp_path / "s" / "plan.csv").exists()
    assert capsys.readouterr().err == ""


def test_below_critical_capacity(tmp_path, capsys):
    assert run(["solve", "--capacity", "510", "--out", str(tmp_path)]) == EXIT_INFEASIBLE
    assert "critical capacity: 511" in capsys.readouterr().err
    assert not (tmp_path / "summary.json").exists()


def test_comply_full_acceptance(tmp_path):
    assert run(["comply", "--model", "bernoulli", "--p", "1.0", "--trials", "5", "--out", str(tmp_path)]) == EXIT_OK
    s = read(tmp_path)
    assert s["result"]["mean_tw"] == s["reference"]["plan_tw"]


@pytest.mark.parametrize("argv", [
    ["solve", "--alpha", "x"],
    ["solve", "--capacity-profile", "1,2,3"],
    ["solve", "--schedule", "/nonexistent/s.csv"],
    ["frobnicate"],
    ["sweep"],
    ["comply", "--p", "2"],
])
def test_validation_exit_code(tmp_path, argv, capsys):
    assert run(argv + ["--out", str(tmp_path)]) == EXIT_INVALID
    assert capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["simulate", "--out", str(blocker / "sub")]) == EXIT_IO


def test_global_flags_either_side(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["--out", str(a), "--seed", "5", "comply", "--p", "0.5", "--trials", "4"]) == EXIT_OK
    assert run(["comply", "--p", "0.5", "--trials", "4", "--seed", "5", "--out", str(b)]) == EXIT_OK
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert read(a)["parameters"]["seed"] == 5


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SLOTFLOW_OUT", str(tmp_path / "env"))
    assert run(["simulate"]) == EXIT_OK
    assert (tmp_path / "env" / "summary.json").exists()


def test_config_file(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"capacity_mode": "optimize", "lambda1": "1", "lambda2": "10"}))
    assert run(["--config", str(tmp_path / "c.json"), "solve", "--out", str(tmp_path / "o")]) == EXIT_OK
    s = read(tmp_path / "o")
    assert s["parameters"]["capacity_mode"] == "optimize"
    assert "capacity_optimization" in s


@pytest.mark.parametrize("argv", [
    ["generate"],
    ["simulate"],
    ["solve"],
    ["capacity", "--lambda1", "1"],
    ["comply", "--model", "gaussian", "--sigma", "30", "--trials", "8"],
    ["sweep", "--model", "bernoulli", "--values", "0,0.5,1", "--trials", "8"],
])
def test_rerun_is_byte_identical(tmp_path, argv):
    for name in ("a", "b"):
        assert run(argv + ["--out", str(tmp_path / name)]) == EXIT_OK
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
