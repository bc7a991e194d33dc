import subprocess
import sys
from pathlib import Path

import pytest

from epamgps.cli import main
from epamgps.harness import ConfigError, parse_config
from epamgps.taskenv import builtin
from epamgps.gps.solver import validate_plan

from conftest import CORPUS, FIXTURES, GOLDEN


def run(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    try:
        return main([str(a) for a in argv])
    except SystemExit as e:
        return e.code


def files(root: Path):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


# -- config parsing -------------------------------------------------------


def test_config_defaults():
    cfg = parse_config("pairs = DAX:JIR\n")
    s = cfg.schedule
    assert (s.order, s.seed, s.criterion, s.max_trials) == ("fixed", 12345, 1, 30)
    assert cfg.pairs_b == () and cfg.probes == ()


def test_config_seed_override():
    assert parse_config("pairs = DAX:JIR\nseed = 3\n", seed=9).schedule.seed == 9


@pytest.mark.parametrize(
    "text,needle,line",
    [
        ("pairs = DAX:JIR\ncolour = red\n", "unknown key", 2),
        ("pairs = DAX:JIR\npairs = KOQ:PEM\n", "duplicate key", 2),
        ("order = fixed\n", "missing 'pairs'", None),
        ("pairs = DAX-JIR\n", "STIMULUS:RESPONSE", 1),
        ("pairs = DAX:JIRR\n", "3 uppercase letters", 1),
        ("pairs = DAX:JIR\nseed = x\n", "integer", 2),
        ("just words\n", "key = value", 1),
        ("pairs = DAX:JIR, DAX:POB\n", "duplicate stimulus DAX", None),
        ("pairs = DAX:JIR\npairs_b = JIR:POB\n", "both stimulus and response", None),
    ],
)
def test_config_errors(text, needle, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text, "x.cfg")
    assert needle in str(info.value)
    assert info.value.line == line
    assert str(info.value).startswith("x.cfg")


# -- exit codes and outputs -----------------------------------------------


def test_features(tmp_path, monkeypatch):
    assert run(["features", "--out", "f"], tmp_path, monkeypatch) == 0
    lines = (tmp_path / "f" / "features.csv").read_text().splitlines()
    assert len(lines) == 27 and lines[0].startswith("letter,f0")
    assert lines[1].split(",")[6] == "1"  # A is a vowel


def test_features_unwritable(tmp_path, monkeypatch):
    (tmp_path / "blocker").write_text("")
    assert run(["features", "--out", "blocker/sub"], tmp_path, monkeypatch) == 1


def test_epam_run_canonical(tmp_path, monkeypatch, capsys):
    assert run(["epam", "run", FIXTURES / "canonical6.cfg", "--out", "o"], tmp_path, monkeypatch) == 0
    out = tmp_path / "o"
    assert sorted(p.name for p in out.iterdir()) == ["metrics.txt", "net.dump", "trials.csv"]
    for name in ("metrics.txt", "net.dump", "trials.csv"):
        assert (out / name).read_bytes() == (GOLDEN / "canonical6" / name).read_bytes()
    assert "criterion_trial = 8" in (out / "metrics.txt").read_text()
    assert "criterion reached at trial 8" in capsys.readouterr().out


def test_epam_run_duplicate_stimulus(tmp_path, monkeypatch, capsys):
    assert run(["epam", "run", FIXTURES / "duplicate.cfg"], tmp_path, monkeypatch) == 1
    assert "duplicate stimulus DAX" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_epam_run_single_pair(tmp_path, monkeypatch):
    assert run(["epam", "run", FIXTURES / "single.cfg", "--out", "o"], tmp_path, monkeypatch) == 0
    metrics = (tmp_path / "o" / "metrics.txt").read_text()
    trials = int(next(l for l in metrics.splitlines() if l.startswith("trials_run")).split("=")[1])
    assert trials <= 10


def test_epam_run_max_trials(tmp_path, monkeypatch):
    cfg = tmp_path / "short.cfg"
    cfg.write_text((FIXTURES / "canonical6.cfg").read_text().replace("max_trials = 30", "max_trials = 2"))
    assert run(["epam", "run", cfg, "--out", "o"], tmp_path, monkeypatch) == 2
    assert "criterion_reached = no" in (tmp_path / "o" / "metrics.txt").read_text()


def test_epam_run_missing_config(tmp_path, monkeypatch):
    assert run(["epam", "run", "nope.cfg"], tmp_path, monkeypatch) == 1


def test_epam_run_interference_report(tmp_path, monkeypatch):
    assert run(["epam", "run", FIXTURES / "interfering.cfg", "--out", "o"], tmp_path, monkeypatch) == 0
    got = (tmp_path / "o" / "metrics.txt").read_text()
    assert got == (GOLDEN / "interfering" / "metrics.txt").read_text()
    assert "ri.recall_a_after_b = 0.6667" in got


def test_epam_run_several_configs_with_jobs(tmp_path, monkeypatch):
    cfgs = [FIXTURES / "interfering.cfg", FIXTURES / "control.cfg"]
    assert run(["epam", "run", *cfgs, "--out", "par", "--jobs", "2"], tmp_path, monkeypatch) == 0
    assert run(["epam", "run", *cfgs, "--out", "ser"], tmp_path, monkeypatch) == 0
    assert files(tmp_path / "par") == files(tmp_path / "ser")
    assert (tmp_path / "par" / "control" / "metrics.txt").read_text() == (
        GOLDEN / "control" / "metrics.txt"
    ).read_text()


def test_epam_probe_generalization(tmp_path, monkeypatch, capsys):
    code = run(["epam", "probe", FIXTURES / "generalization.cfg", "--out", "p"], tmp_path, monkeypatch)
    assert code == 0
    assert capsys.readouterr().out.splitlines() == ["DAX,JIR", "DAQ,JIR"]
    for name in ("probe.csv", "probe_trace.txt", "net.dump"):
        assert (tmp_path / "p" / name).read_bytes() == (GOLDEN / "generalization" / name).read_bytes()


def test_epam_probe_flag_overrides(tmp_path, monkeypatch, capsys):
    args = ["epam", "probe", FIXTURES / "generalization.cfg", "--probes", "KOX,BOX", "--out", "p"]
    assert run(args, tmp_path, monkeypatch) == 0
    # K shares the tested f1 bit with D; B does not
    assert capsys.readouterr().out.splitlines() == ["KOX,JIR", "BOX,none"]
    assert run(["epam", "probe", FIXTURES / "single.cfg", "--probes", "XXX"], tmp_path, monkeypatch) == 1


def test_gps_solve_arith(tmp_path, monkeypatch, capsys):
    path = Path(__file__).parents[1] / "src" / "epamgps" / "taskenv" / "builtins" / "arith.task"
    assert run(["gps", "solve", path, "--out", "g"], tmp_path, monkeypatch) == 0
    assert capsys.readouterr().out.strip() == "plan: [add-ones]"
    assert sorted(p.name for p in (tmp_path / "g").iterdir()) == ["trace.json", "trace.txt"]


def test_gps_solve_jugs(tmp_path, monkeypatch, capsys):
    assert run(["gps", "solve", "jugs", "--out", "g"], tmp_path, monkeypatch) == 0
    plan = capsys.readouterr().out.strip()[len("plan: [") : -1].split(", ")
    assert validate_plan(builtin("jugs"), plan)


def test_gps_solve_cyclic(tmp_path, monkeypatch):
    code = run(["gps", "solve", FIXTURES / "cyclic.task", "--out", "g"], tmp_path, monkeypatch)
    assert code in (3, 4)
    assert "outcome no-solution" in (tmp_path / "g" / "trace.txt").read_text()


def test_gps_solve_budget(tmp_path, monkeypatch):
    assert run(["gps", "solve", FIXTURES / "counter.task", "--out", "g"], tmp_path, monkeypatch) == 4
    assert run(["gps", "solve", "hanoi3", "--budget-goals", "5", "--out", "h"], tmp_path, monkeypatch) == 4
    assert run(["gps", "solve", "hanoi3", "--budget-depth", "0"], tmp_path, monkeypatch) == 1


def test_gps_solve_lookahead_off(tmp_path, monkeypatch, capsys):
    assert run(["gps", "solve", "logic", "--lookahead", "off", "--out", "g"], tmp_path, monkeypatch) == 0
    assert capsys.readouterr().out.startswith("plan: [")


def test_gps_solve_parse_error(tmp_path, monkeypatch, capsys):
    bad = CORPUS / "undeclared_op.task"
    assert run(["gps", "solve", bad], tmp_path, monkeypatch) == 1
    assert capsys.readouterr().err.strip() == f"{bad}:8:19: table row 'wrong-amount' names undeclared operator 'pourr'"


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["epam"], ["gps", "solve"], ["gps", "solve", "jugs", "--lookahead", "maybe"]],
)
def test_usage_errors_exit_one(argv, tmp_path, monkeypatch):
    assert run(argv, tmp_path, monkeypatch) == 1


def test_outputs_stay_in_out_dir(tmp_path, monkeypatch):
    runs = [
        ["features", "--out", "o1"],
        ["epam", "run", FIXTURES / "canonical6.cfg", "--out", "o2"],
        ["epam", "probe", FIXTURES / "generalization.cfg", "--out", "o3"],
        ["gps", "solve", "hanoi3", "--out", "o4"],
    ]
    for i, argv in enumerate(runs, 1):
        run(argv, tmp_path, monkeypatch)
        assert sorted(p.name for p in tmp_path.iterdir()) == [f"o{k}" for k in range(1, i + 1)]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "epamgps", "gps", "solve", "arith", "--out", str(tmp_path / "g")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "plan: [add-ones]"
