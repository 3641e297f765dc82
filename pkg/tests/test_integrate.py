import math

import numpy as np
import pytest

from waterwheel import IntegratorOptions, integrate, make_scenario, mode_rhs
from waterwheel.integrate import BlowupError, StepUnderflowError, Trajectory, step_rk4


def decay(s, t):
    return -s


def test_rk4_single_step_matches_series():
    h = 0.1
    out = step_rk4(decay, np.array([1.0]), 0.0, h)
    assert out[0] == pytest.approx(1 - h + h**2 / 2 - h**3 / 6 + h**4 / 24, rel=1e-15)


def test_rk4_exact_on_time_polynomial():
    # cubic in t is integrated exactly by a fourth-order method
    traj = integrate(lambda s, t: np.array([3 * t**2]), [0.0], (0.0, 2.0), IntegratorOptions(step=0.5, sample_interval=0.5))
    np.testing.assert_allclose(traj.states[:, 0], traj.times**3, rtol=1e-13)


def test_grid_and_endpoints():
    traj = integrate(decay, [1.0, 2.0], (1.0, 3.0), IntegratorOptions(step=1e-3, sample_interval=0.1), labels=("u", "v"))
    assert len(traj) == 21
    assert traj.times[0] == 1.0 and traj.times[-1] == 3.0
    assert traj.dt == pytest.approx(0.1)
    np.testing.assert_allclose(traj["v"], 2 * np.exp(-(traj.times - 1)), rtol=1e-10)
    assert traj.window(1.5, 2.0).sum() == 6


def test_rk45_accuracy_and_grid():
    opts = IntegratorOptions(method="rk45", rtol=1e-10, atol=1e-12, sample_interval=0.05)
    traj = integrate(lambda s, t: np.array([s[1], -s[0]]), [1.0, 0.0], (0.0, 10.0), opts)
    np.testing.assert_allclose(traj.states[:, 0], np.cos(traj.times), atol=1e-8)
    assert np.allclose(np.diff(traj.times), 0.05)


def test_rk45_agrees_with_rk4_on_scenario():
    params, s0, _ = make_scenario("unsteady-asymmetric", 1.0)
    rhs = lambda s, t: mode_rhs(s, t, params)
    fixed = integrate(rhs, s0, (0.0, 5.0), IntegratorOptions(step=1e-3))
    adaptive = integrate(rhs, s0, (0.0, 5.0), IntegratorOptions(method="rk45", rtol=1e-10, atol=1e-12))
    assert np.max(np.abs(fixed.states - adaptive.states)) <= 1e-5


def test_blowup_carries_tau():
    with pytest.raises(BlowupError) as info:
        integrate(lambda s, t: s**2, [1.0], (0.0, 2.0), IntegratorOptions(step=1e-2, sample_interval=1e-2))
    assert 0.5 < info.value.tau < 1.1
    assert "tau" in str(info.value)


def test_adaptive_blowup():
    with pytest.raises((BlowupError, StepUnderflowError)) as info:
        integrate(lambda s, t: s**2, [1.0], (0.0, 2.0), IntegratorOptions(method="rk45"))
    assert info.value.tau < 1.0 + 1e-6


def test_step_underflow():
    # a huge jump in the field at t = 0.5 cannot be resolved by any step
    def rhs(s, t):
        return np.array([1e30 if t >= 0.5 else 0.0])

    with pytest.raises(StepUnderflowError) as info:
        integrate(rhs, [0.0], (0.0, 1.0), IntegratorOptions(method="rk45", sample_interval=0.5))
    assert info.value.tau == pytest.approx(0.5, abs=1e-9)


def test_step_rk4_raises_on_nonfinite():
    with pytest.raises(BlowupError):
        step_rk4(lambda s, t: np.array([np.inf]), np.array([0.0]), 0.0, 0.1)
    with pytest.raises(ValueError):
        step_rk4(decay, np.array([0.0]), 0.0, 0.0)


@pytest.mark.parametrize("field, value", [("step", 0.0), ("rtol", -1.0), ("atol", math.nan), ("sample_interval", math.inf)])
def test_option_validation(field, value):
    with pytest.raises(ValueError):
        IntegratorOptions(**{field: value})
    with pytest.raises(ValueError):
        IntegratorOptions(method="euler")


def test_span_validation():
    with pytest.raises(ValueError):
        integrate(decay, [1.0], (1.0, 1.0))
    with pytest.raises(ValueError):
        integrate(decay, [1.0], (0.0, 0.015), IntegratorOptions(sample_interval=0.01))


def test_trajectory_invariants():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0, 3.0]), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [np.nan]]))
    with pytest.raises(ValueError):
        Trajectory(np.array([]), np.zeros((0, 1)))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 1.0]), np.zeros((2, 2)), labels=("x",))


def test_scenario_trajectory_is_valid(scenario_run):
    _, traj = scenario_run("unsteady-asymmetric", 1.0)
    assert len(traj) == 6001
    assert np.all(np.isfinite(traj.states))
    assert np.allclose(np.diff(traj.times), 0.01, rtol=1e-9, atol=0)
