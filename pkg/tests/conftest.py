import functools
import time

import pytest

from waterwheel import IntegratorOptions, integrate, make_scenario, mode_rhs
from waterwheel.models import mode_labels


@functools.lru_cache(maxsize=None)
def _run(kind, x0, sample_interval=1e-2, step=1e-3, t_end=60.0):
    params, state0, _ = make_scenario(kind, x0)
    opts = IntegratorOptions(step=step, sample_interval=sample_interval)
    traj = integrate(lambda s, t: mode_rhs(s, t, params), state0, (0.0, t_end), opts,
                     labels=mode_labels(params.N))
    return params, traj


@pytest.fixture(scope="session")
def scenario_run():
    """``scenario_run(kind, x0, ...) -> (params, trajectory)``, cached per session."""
    return _run


@pytest.fixture(scope="session")
def suite_outputs(tmp_path_factory):
    """Two default suite runs into separate directories, with wall times."""
    from waterwheel.cli import ScenarioConfig, run_suite

    runs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(f"suite-{name}")
        start = time.perf_counter()
        comparison = run_suite(ScenarioConfig(), out)
        runs.append((out, comparison, time.perf_counter() - start))
    return runs


# one summary line per acceptance criterion

_ACCEPTANCE = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _ACCEPTANCE.append((marker.args[0], marker.args[1], outcome))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{outcome}] criterion {number:2d}: {title}")
