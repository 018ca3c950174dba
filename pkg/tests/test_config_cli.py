import csv
import io
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from roughstat import cli, runner
from roughstat.analysis import DEFAULT_SCHEDULE
from roughstat.config import KEYS, parse_config
from roughstat.errors import ConfigError
from roughstat.theorems import CheckReport, Status

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
MINIMAL = "space = max_rplus\nsequence = example_2_1\nmode = limit_set\nr = 1\n"


def write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# -- parse_config ---------------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.mode == "limit_set" and cfg.r == 1
    assert cfg.N == 100_000 and cfg.tau == Fraction(1, 100)
    assert tuple(cfg.schedule) == DEFAULT_SCHEDULE
    assert (cfg.grid.lo, cfg.grid.hi, cfg.grid.step) == (0, 5, Fraction(1, 20))
    assert cfg.tail_fraction == Fraction(1, 2)


def test_decimals_are_exact():
    cfg = parse_config(MINIMAL + "step = 0.05\ntau = 0.01\n")
    assert cfg.grid.step == Fraction(1, 20) and cfg.tau == Fraction(1, 100)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + MINIMAL.replace("r = 1", "r = 1   # roughness"))
    assert cfg.r == 1


def test_step_zero_reported_with_line():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "step = 0\n")
    assert exc.value.problems == ["line 5: grid step must be positive"]


def test_schedule_not_decreasing():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "schedule = 1, 1, 0.5\n")
    assert any("schedule must be strictly decreasing" in p for p in exc.value.problems)


def test_all_problems_reported():
    text = (CONFIGS / "bad.cfg").read_text()
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    joined = "\n".join(exc.value.problems)
    assert "line 4: grid step must be positive" in joined
    assert "line 5: schedule must be strictly decreasing" in joined
    assert "line 6: unknown key 'colour'" in joined


@pytest.mark.parametrize("text,fragment", [
    ("mode = limit_set\n", "missing required key 'space'"),
    (MINIMAL + "r = x\n", "duplicate key 'r'"),
    (MINIMAL + "N = 1.5\n", "expected an integer"),
    (MINIMAL + "tau = 1/2\n", "tau must lie strictly between"),
    (MINIMAL + "lo = abc\n", "malformed decimal"),
    (MINIMAL.replace("limit_set", "rough_stat"), "requires key 'x'"),
    (MINIMAL + "a = 1\n", "space"),
    (MINIMAL.replace("example_2_1", "nonsense"), "sequence"),
    ("space = max_rplus\nsequence = linear\nmode = fly\n", "unknown mode"),
])
def test_rejections(text, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert any(fragment in p for p in exc.value.problems)


def test_every_key_documented_in_help(capsys):
    with pytest.raises(SystemExit):
        cli.main(["run", "--help"])
    out = capsys.readouterr().out
    for key in KEYS:
        assert key in out
    assert "exit codes" in out


# -- run_experiment -------------------------------------------------------------------

def test_limit_set_report():
    rep = runner.run_experiment(parse_config((CONFIGS / "example_limit_set.cfg").read_text()))
    body = json.loads(rep.json_text())
    assert set(body) == {"config", "results", "discrepancies", "version"}
    assert body["results"]["intervals"] == [[1.0, 5.0]]
    assert 0.0 in body["results"]["nonmembers"]
    [finding] = body["discrepancies"]
    assert finding["point"] == 0.0 and finding["probe_eps"] == "1/2"
    num, den = map(int, finding["exceedance_density"]["value"].split("/"))
    assert Fraction(num, den) >= Fraction(45, 100)
    assert rep.exit_code == 0


def test_theorem_mode_report():
    rep = runner.run_experiment(parse_config((CONFIGS / "diameter_alternating.cfg").read_text()))
    [check] = rep.body["results"]["checks"]
    assert check["outcome"] == "Pass"
    assert check["evidence"]["diameter"] == 1 and check["evidence"]["bound"] == 4
    assert rep.exit_code == 0


def test_suite_mode_report():
    rep = runner.run_experiment(parse_config("mode = suite\nN = 10000\n"))
    ids = sorted(c["theorem"] for c in rep.body["results"]["checks"])
    assert ids == sorted(["2.1", "2.2", "2.3", "cor-2.1", "2.5", "2.6", "2.7", "2.8", "2.9"])
    assert rep.body["results"]["summary"] == {"Pass": 9}


def test_csv_and_json_carry_same_densities():
    rep = runner.run_experiment(parse_config(MINIMAL + "N = 10000\nstep = 1/4\n"))
    rows = list(csv.DictReader(io.StringIO(rep.csv_text())))
    assert list(rows[0]) == runner.LIMIT_SET_HEADER
    members = rep.body["results"]["membership"]
    assert len(rows) == len(members)
    for row, m in zip(rows, members):
        assert float(row["candidate"]) == m["candidate"] and row["verdict"] == m["verdict"]
        per = {e["eps"]: e["value"] for e in m["per_eps"]}
        best = max(per.values(), key=Fraction)
        assert Fraction(int(row["worst_density_num"]), int(row["worst_density_den"])) == Fraction(best)
        assert per[row["worst_eps"]] == f"{row['worst_density_num']}/{row['worst_density_den']}"


@pytest.mark.parametrize("mode,extra", [
    ("rough_stat", "x = 3/2\n"), ("stat", "x = 2\n"), ("rough", "x = 2\n"),
    ("bounded", "M_grid = 1, 2, 3, 5, 10\n"), ("cauchy", "m_candidates = 2\nl_grid = 0, 1, 2\n"),
    ("clusters", "points = 0, 1/2, 2, 3\n"), ("rough_limit_set", "step = 1/4\n"),
])
def test_every_mode_runs(mode, extra):
    text = MINIMAL.replace("limit_set", mode) + "N = 10000\n" + extra
    rep = runner.run_experiment(parse_config(text))
    assert rep.exit_code == 0
    assert rep.csv_text().count("\n") >= 2
    assert json.loads(rep.json_text())["config"]["mode"] == mode


# -- CLI ------------------------------------------------------------------------------

def test_cli_run_stdout(capsys):
    code = cli.main(["run", str(CONFIGS / "example_rough_limit_set.cfg"), "--format", "csv"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == ",".join(runner.LIMIT_SET_HEADER)
    assert all(line.split(",")[1] == "No" for line in out[1:])
    assert len(out) == 102


def test_cli_run_out_dir(tmp_path):
    cfg = write(tmp_path, MINIMAL + "N = 10000\n")
    code = cli.main(["run", cfg, "--out", str(tmp_path / "o"), "--format", "both"])
    assert code == 0
    assert json.loads((tmp_path / "o" / "exp.json").read_text())["config"]["N"] == 10000
    assert (tmp_path / "o" / "exp.csv").read_text().startswith("candidate,")


def test_cli_seed_override(tmp_path, capsys):
    cfg = write(tmp_path, "mode = suite\nN = 5000\nrandom_instances = 1\n")
    cli.main(["run", cfg, "--seed", "11"])
    assert json.loads(capsys.readouterr().out)["config"]["seed"] == 11


def test_cli_config_error_exit_code(capsys):
    code = cli.main(["run", str(CONFIGS / "bad.cfg")])
    err = capsys.readouterr()
    assert code == 3 and err.out == ""
    assert err.err.count("error:") == 3


def test_cli_missing_file_exit_code(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "absent.cfg")]) == 3
    assert capsys.readouterr().out == ""


def test_cli_engine_error_emits_nothing(tmp_path, capsys):
    cfg = write(tmp_path, "space = max_rplus\nsequence = alternating:1\nmode = stat\nx = 0\n")
    assert cli.main(["run", cfg]) == 3
    assert capsys.readouterr().out == ""


def test_cli_theorem_fail_exit_code(tmp_path, monkeypatch, capsys):
    def failing(tid, inst):
        return CheckReport(tid, inst, Status.HOLDS, Status.FAILS)
    monkeypatch.setattr(runner, "run_check", failing)
    cfg = write(tmp_path, (CONFIGS / "diameter_alternating.cfg").read_text())
    assert cli.main(["run", cfg]) == 2
    assert json.loads(capsys.readouterr().out)["results"]["summary"] == {"Fail": 1}


def test_cli_suite_csv(capsys):
    assert cli.main(["suite", "--n", "10000", "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == runner.CHECK_HEADER
    assert [r[4] for r in rows[1:]] == ["Pass"] * 9


def test_cli_suite_bad_tau():
    with pytest.raises(SystemExit):
        cli.main(["suite", "--tau", "1/2"])


@pytest.mark.parametrize("space", ["max_rplus", "shifted_euclidean:1"])
def test_cli_check_axioms(space, capsys):
    assert cli.main(["check-axioms", space]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["violations"] == [] and len(body["sample"]) == 12


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "roughstat.cli", "check-axioms", "max_rplus",
                          "--samples", "4"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["checked_triples"] == 64
