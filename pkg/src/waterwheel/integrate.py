"""Time stepping for non-autonomous systems ``s' = rhs(s, tau)``.

Two methods are available: classical fixed-step RK4 and the Dormand-Prince
5(4) embedded pair with PI step-size control. Both return a
:class:`Trajectory` sampled on a uniform grid; the adaptive method fills the
grid with its fourth-order continuous extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "IntegrationError",
    "BlowupError",
    "StepUnderflowError",
    "IntegratorOptions",
    "Trajectory",
    "step_rk4",
    "integrate",
]

METHODS = ("rk4", "rk45")
MIN_STEP = 1e-12


class IntegrationError(RuntimeError):
    """Numerical failure; ``tau`` is the last instant with a finite state."""

    def __init__(self, message, tau):
        super().__init__(f"{message} (last good tau = {tau:.17g})")
        self.tau = tau


class BlowupError(IntegrationError):
    pass


class StepUnderflowError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "rk4"
    step: float = 1e-3
    rtol: float = 1e-9
    atol: float = 1e-12
    sample_interval: float = 1e-2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        for name in ("step", "rtol", "atol", "sample_interval"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if times.ndim != 1 or len(times) == 0 or len(times) != len(states):
            raise ValueError("times and states must be non-empty with matching lengths")
        if len(times) > 1:
            dt = np.diff(times)
            if np.any(dt <= 0):
                raise ValueError("sample times must be strictly increasing")
            if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
                raise ValueError("sample times must be uniformly spaced")
        if not np.all(np.isfinite(states)):
            raise ValueError("trajectory contains non-finite values")
        if self.labels and len(self.labels) != states.shape[1]:
            raise ValueError("one label per state component is required")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return len(self.times)

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            raise ValueError("a single sample has no spacing")
        return float(self.times[1] - self.times[0])

    def __getitem__(self, label):
        return self.states[:, self.labels.index(label)]

    def window(self, lo=-np.inf, hi=np.inf):
        """Boolean mask of samples with ``lo <= tau <= hi``."""
        return (self.times >= lo) & (self.times <= hi)


def step_rk4(rhs: Callable, state, tau: float, h: float):
    """One classical Runge-Kutta step of size ``h`` from ``(state, tau)``."""
    if not h > 0:
        raise ValueError("step must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _rk4(rhs, np.asarray(state, dtype=float), tau, h)
    if not np.all(np.isfinite(out)):
        raise BlowupError("non-finite state in RK4 stage", tau)
    return out


def _rk4(rhs, y, t, h):
    hh = 0.5 * h
    k1 = rhs(y, t)
    k2 = rhs(y + hh * k1, t + hh)
    k3 = rhs(y + hh * k2, t + hh)
    k4 = rhs(y + h * k3, t + h)
    # every stage carries a non-zero weight, so a non-finite stage always
    # shows up in the combined update
    return y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def _sample_grid(span, sample_interval):
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise ValueError(f"span must satisfy t0 < t1, got {span}")
    n = round((t1 - t0) / sample_interval)
    if n < 1 or not math.isclose(n * sample_interval, t1 - t0, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("span length must be a whole number of sample intervals")
    return t0, n


def integrate(rhs: Callable, state0, span: Sequence[float], opts: IntegratorOptions = IntegratorOptions(),
              labels=()) -> Trajectory:
    """Integrate ``rhs`` over ``span`` and sample every ``opts.sample_interval``.

    The first and last samples are the endpoints of ``span``. Raises
    :class:`BlowupError` if the state stops being finite and
    :class:`StepUnderflowError` if the adaptive step collapses.
    """
    t0, n_samples = _sample_grid(span, opts.sample_interval)
    y0 = np.array(state0, dtype=float)
    if opts.method == "rk4":
        states = _integrate_rk4(rhs, y0, t0, n_samples, opts)
    else:
        states = _integrate_dopri(rhs, y0, t0, n_samples, opts)
    times = t0 + opts.sample_interval * np.arange(n_samples + 1)
    times[-1] = float(span[1])
    return Trajectory(times, states, tuple(labels))


def _integrate_rk4(rhs, y, t0, n_samples, opts):
    sub = max(1, math.ceil(opts.sample_interval / opts.step - 1e-9))
    h = opts.sample_interval / sub
    out = np.empty((n_samples + 1,) + y.shape)
    out[0] = y
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_samples + 1):
            for _ in range(sub):
                t = t0 + k * h
                y_new = _rk4(rhs, y, t, h)
                if not np.all(np.isfinite(y_new)):
                    raise BlowupError("non-finite state in RK4 stage", t)
                y = y_new
                k += 1
            out[i] = y
    return out


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# coefficients of theta, theta^2, theta^3, theta^4 in the continuous extension
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


def _dopri_step(rhs, y, t, h, k0):
    K = np.empty((7,) + y.shape)
    K[0] = k0
    for i in range(1, 7):
        dy = sum(a * K[j] for j, a in enumerate(_A[i]) if a != 0.0)
        K[i] = rhs(y + h * dy, t + _C[i] * h)
    y_new = y + h * np.tensordot(_B, K, axes=1)
    err = h * np.tensordot(_E, K, axes=1)
    return y_new, err, K


def _integrate_dopri(rhs, y, t0, n_samples, opts):
    dt_s = opts.sample_interval
    t_end = t0 + n_samples * dt_s
    out = np.empty((n_samples + 1,) + y.shape)
    out[0] = y
    next_i = 1
    t = t0
    h = min(opts.step, t_end - t0)
    err_prev = 1e-4
    nonfinite = False
    with np.errstate(over="ignore", invalid="ignore"):
        k0 = rhs(y, t)
        if not np.all(np.isfinite(k0)):
            raise BlowupError("non-finite derivative", t)
        while next_i <= n_samples:
            if h < MIN_STEP:
                if nonfinite:
                    raise BlowupError("non-finite state at every trial step", t)
                raise StepUnderflowError("adaptive step fell below 1e-12", t)
            last = t + h >= t_end - 1e-12 * max(1.0, abs(t_end))
            if last:
                h = t_end - t
            y_new, err, K = _dopri_step(rhs, y, t, h, k0)
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
            with np.errstate(invalid="ignore"):
                err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            if not (np.all(np.isfinite(y_new)) and math.isfinite(err_norm)):
                nonfinite = True
                h *= _MIN_FACTOR
                continue
            nonfinite = False
            if err_norm > 1.0:
                h *= max(_MIN_FACTOR, _SAFETY * err_norm ** (-_ALPHA))
                continue
            t_new = t_end if last else t + h
            # fill sample points covered by this step
            Q = np.tensordot(_P.T, K, axes=1)  # shape (4, ...)
            while next_i <= n_samples:
                ts = t0 + next_i * dt_s
                if next_i < n_samples and ts > t_new:
                    break
                if next_i == n_samples and not last:
                    break
                theta = (ts - t) / h if next_i < n_samples else 1.0
                powers = np.array([theta, theta**2, theta**3, theta**4])
                out[next_i] = y_new if next_i == n_samples else y + h * np.tensordot(powers, Q, axes=1)
                next_i += 1
            if err_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err_norm ** (-_ALPHA) * err_prev**_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = max(err_norm, 1e-4)
            t, y = t_new, y_new
            k0 = K[6]
            h *= factor
    return out
