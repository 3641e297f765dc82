import csv
import json
import math

import numpy as np
import pytest

from waterwheel import cli
from waterwheel.cli import ConfigError, ScenarioConfig, build_config, config_from_args, build_parser, main, parse_config_text, run_scenario
from waterwheel.forcing import Constant
from waterwheel.integrate import IntegratorOptions

QUICK = [
    "--t-end", "10", "--lyap-interval", "0.1", "--transient", "2", "--grid-n", "21",
]


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def check_rectangular_finite(path):
    header, rows = read_csv(path)
    assert rows
    for row in rows:
        assert len(row) == len(header)
        assert all(math.isfinite(float(v)) for v in row)
    return header, rows


def test_parse_config_text():
    text = """
    # a comment
    scenario = steady-asymmetric
    x0 = 0.5   # trailing
    integrator.step = 2e-3
    region.x = -5, 5
    forcing.mu = {"kind": "constant", "value": 0.25}
    """
    values = parse_config_text(text)
    assert values["scenario"] == "steady-asymmetric"
    assert values["x0"] == 0.5 and values["step"] == 2e-3
    assert values["grid_x"] == (-5.0, 5.0)
    assert values["forcing_mu"] == Constant(0.25)
    cfg = build_config(values)
    assert cfg.integrator == IntegratorOptions(step=2e-3)


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("x0 = 1\nnonsense line\n", 2),
        ("x0 = 1\n\nbogus.key = 3\n", 3),
        ("integrator.step = fast\n", 1),
        ("scenario = a\nregion.x = 1\n", 2),
    ],
)
def test_config_errors_name_line(text, lineno):
    with pytest.raises(ConfigError, match=f"cfg.txt:{lineno}:"):
        parse_config_text(text, "cfg.txt")


def test_config_validation():
    with pytest.raises(ConfigError):
        build_config({"scenario": "wobbly"})
    with pytest.raises(ConfigError):
        build_config({"step": -1.0})
    with pytest.raises(ConfigError):
        build_config({"grid_x": (3.0, 1.0)})
    with pytest.raises(ConfigError):
        build_config({"transient": 80.0})


def test_flags_override_config(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("x0 = 0\nintegrator.step = 2e-3\nmodes.epsilon = 0.3\n")
    args = build_parser().parse_args(["run", "--config", str(cfg_file), "--x0", "1", "--grid-z", "0,50"])
    cfg = config_from_args(args)
    assert cfg.x0 == 1.0 and cfg.integrator.step == 2e-3 and cfg.epsilon == 0.3
    assert cfg.grid_z == (0.0, 50.0)


def test_every_key_has_a_flag():
    parser = build_parser()
    flags = {a for action in parser._subparsers._group_actions[0].choices["run"]._actions for a in action.option_strings}
    for key, (_, flag, _) in cli._KEYS.items():
        assert flag in flags, key
    for required in ("--scenario", "--x0", "--t-end", "--method", "--step", "--rtol", "--atol", "--epsilon",
                     "--grid-x", "--grid-z", "--grid-n", "--snapshot-tau", "--out", "--config"):
        assert required in flags


def test_quick_run_writes_files(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out)] + QUICK) == 0
    header, rows = check_rectangular_finite(out / "trajectory.csv")
    assert header == ["tau", "x", "y", "z", "a2", "b2", "circle_center_a", "circle_center_b", "circle_radius"]
    assert len(rows) == 1001
    header, _ = check_rectangular_finite(out / "gseries.csv")
    assert header == ["tau", "g1-g4", "g2-g4", "g3-g4", "g1-g2", "g2-g3", "g1-g3"]
    header, events = read_csv(out / "events.csv")
    assert header == ["tau", "i", "j", "g_value", "residual"]
    header, grid = check_rectangular_finite(out / "region.csv")
    assert len(header) == 22 and len(grid) == 21
    summary = json.loads((out / "summary.json").read_text())
    assert summary["conjecture"]["total_events"] == len(events)
    assert summary["lyapunov"]["sample_count"] == 100
    # trajectory rows parse back to the integrated values
    assert float(rows[0][3]) == pytest.approx(0.5, abs=1e-12)


def test_run_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["run", "--out", str(tmp_path / name), "--scenario", "steady-asymmetric"] + QUICK) == 0
    for f in ("trajectory.csv", "gseries.csv", "events.csv", "region.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_default_run_summary(tmp_path):
    summary = run_scenario(ScenarioConfig(), tmp_path)
    flags = summary["conjecture"]
    assert all(flags[f"condition_{k}"] for k in (1, 2, 3, 4)) and flags["all"]
    assert summary["lyapunov"]["exponent"] > 0.05


def test_symmetric_still_run(tmp_path):
    summary = run_scenario(ScenarioConfig(scenario="unsteady-symmetric", x0=0.0), tmp_path)
    _, rows = read_csv(tmp_path / "trajectory.csv")
    assert max(abs(float(r[1])) for r in rows) <= 1e-8
    assert summary["lyapunov"]["exponent"] <= 0
    assert summary["lyapunov"]["subsystem"] == ["y", "z", "a2", "b2"]


def test_malformed_config_exit(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("x0 = 1\nthis is not valid\n")
    assert main(["run", "--config", str(cfg_file), "--out", str(tmp_path / "o")]) == 1
    assert "bad.cfg:2:" in capsys.readouterr().err


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["run", "--no-such-flag"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1
    assert main(["run", "--step", "abc", "--out", str(tmp_path)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_numerical_failure_exit(tmp_path, capsys):
    huge = '{"kind": "constant", "value": 1e200}'
    code = main(["run", "--forcing-r", huge, "--out", str(tmp_path / "o")] + QUICK)
    assert code == 2
    assert "tau" in capsys.readouterr().err


def test_io_failure_exit(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--out", str(blocker / "sub")] + QUICK) == 3


def test_suite_structure(suite_outputs):
    out, comparison, _ = suite_outputs[0]
    dirs = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert len(dirs) == 6
    runs = comparison["runs"]
    assert set(runs) == set(dirs)
    assert runs["unsteady-symmetric_x0-0"]["sign_switches_x"]["full"] == 0
    assert runs["unsteady-asymmetric_x0-0"]["sign_switches_x"]["full"] >= 1
    assert runs["steady-asymmetric_x0-0"]["sign_switches_x"]["full"] >= 1
    for x0 in ("x0=1", "x0=0"):
        entry = comparison["disorder"][x0]
        assert sorted(entry["by_lyapunov"]) == sorted(entry["claimed"])
    for d in dirs:
        for f in ("trajectory.csv", "gseries.csv"):
            header, rows = read_csv(out / d / f)
            assert all(len(r) == len(header) for r in rows)
            assert np.all(np.isfinite(np.array(rows, dtype=float)))
