import json
import os

import pytest

from frogsim import cli
from frogsim.cli import FIXED_HEADER, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _header(text):
    return next(line for line in text.splitlines() if not line.startswith("#"))


def test_alpha0_inf(capsys):
    code, out, _ = _run(capsys, "alpha0", "--mean-eta", "inf")
    assert code == 0
    assert json.loads(out)["alpha0"] == 0
    assert '"alpha0": 0,' in out


def test_alpha0_one(capsys):
    code, out, _ = _run(capsys, "alpha0", "--mean-eta", "1")
    assert 1.75 <= json.loads(out)["alpha0"] <= 1.87


def test_rumor_dp_closed_form(capsys):
    code, out, _ = _run(capsys, "rumor", "--process", "fw", "--radius", "bernoulli:0.9",
                        "--window", "10", "--dp")
    assert code == 0
    assert json.loads(out)["probability"] == pytest.approx(0.9**10, abs=1e-12)


def test_usage_errors(capsys):
    assert _run(capsys, "alpha0", "--mean-eta", "-1")[0] == 1
    assert _run(capsys, "alpha0")[0] == 1
    assert _run(capsys, "nosuch")[0] == 1
    assert _run(capsys, "rumor", "--radius", "bernoulli:0.5", "--process", "bfw", "--dp")[0] == 1
    assert _run(capsys, "frog", "--alpha", "1", "--beta", "0.5", "--engine", "warp")[0] == 1
    assert _run(capsys, "frog", "--alpha", "-1", "--beta", "0.5", "--reps", "5")[0] == 1
    assert _run(capsys, "alpha0", "--mean-eta", "1", "--format", "csv", "--seed", "-3")[0] == 1


def test_csv_header_and_metadata(capsys):
    code, out, _ = _run(capsys, "tail", "--alpha", "1", "--beta", "0.75", "--n-grid", "100,1000")
    assert code == 0
    assert out.startswith("# tool=frogsim version=")
    assert "# seed=0" in out
    assert _header(out).split(",")[: len(FIXED_HEADER)] == list(FIXED_HEADER)


def test_env_seed_and_config_file(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("FROGSIM_SEED", "77")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1\nbeta = 0.25  # comment\nwindows = 50,100\nreps = 40\n")
    code, out, _ = _run(capsys, "recurrence", "--config", str(cfg), "--reps", "30")
    assert code == 0
    assert "# seed=77" in out
    assert "# config.reps=30" in out  # flag overrides the file
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 2 and rows[0].split(",")[9] == "77"


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha 1\n")
    assert _run(capsys, "tail", "--config", str(cfg), "--beta", "1")[0] == 1
    assert _run(capsys, "tail", "--config", str(tmp_path / "missing"), "--alpha", "1", "--beta", "1")[0] == 1


def test_atomic_output_file(capsys, tmp_path):
    path = tmp_path / "frog.json"
    per = tmp_path / "frog.csv"
    code, out, _ = _run(capsys, "frog", "--alpha", "1", "--beta", "0.25", "--window", "50",
                        "--reps", "20", "--output", str(path), "--per-rep", str(per))
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["reps"] == 20 and doc["meta"]["seed"] == 0
    lines = [l for l in per.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 21
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


def test_couple_exit_code(capsys, monkeypatch):
    code, out, _ = _run(capsys, "couple", "--reps", "300", "--window", "20")
    assert code == 0 and json.loads(out)["violations"] == 0

    class Fake:
        violations, fw, bfw, bfw_star, fw_star = 1, 0, 0, 0, 0

    monkeypatch.setattr(cli, "coupling_audit", lambda *a, **k: Fake())
    assert _run(capsys, "couple", "--reps", "10", "--window", "5")[0] == 3


def test_numeric_failure_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("quadrature budget exhausted")

    monkeypatch.setattr(cli, "criterion_check", boom)
    assert _run(capsys, "tail", "--alpha", "1", "--beta", "0.5")[0] == 2


@pytest.mark.parametrize("argv", [
    ("phase", "--alpha-grid", "1", "--beta-grid", "0.25,0.75", "--windows", "50,100", "--reps", "50"),
    ("rumor", "--process", "bfw-star", "--radius", "geometric:0.6", "--window", "10", "--reps", "200"),
])
def test_workers_byte_identical(capsys, argv):
    outs = {_run(capsys, *argv, "--workers", str(w))[1] for w in (1, 4)}
    assert len(outs) == 1
