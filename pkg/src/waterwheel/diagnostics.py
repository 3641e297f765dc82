"""Quantitative chaos indicators: largest Lyapunov exponent, sign switches."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import BlowupError, _rk4

__all__ = ["LyapunovEstimate", "largest_lyapunov", "sign_switch_count"]


@dataclass(frozen=True)
class LyapunovEstimate:
    exponent: float
    horizon: float
    renorm_interval: float
    sample_count: int

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "horizon": self.horizon,
            "renorm_interval": self.renorm_interval,
            "sample_count": self.sample_count,
        }


def largest_lyapunov(rhs, state0, span, renorm_interval=0.5, perturbation=1e-8, *,
                     transient=0.0, step=1e-3, seed=0, frozen=()) -> LyapunovEstimate:
    """Benettin two-trajectory estimate of the largest Lyapunov exponent.

    A shadow trajectory starts ``perturbation`` away from ``state0`` along a
    seeded random direction. Both are advanced together with RK4 (``rhs``
    must therefore accept states of shape ``(d, 2)``), and every
    ``renorm_interval`` the separation is measured and rescaled back to
    ``perturbation``. Log growth from intervals ending after
    ``span[0] + transient`` is averaged.

    Components listed in ``frozen`` have their derivative forced to zero in
    both trajectories, e.g. to restrict the estimate to an invariant
    subsystem. ``sample_count`` is the total number of renormalizations.
    """
    t0, t1 = float(span[0]), float(span[1])
    if not renorm_interval > 0 or not perturbation > 0:
        raise ValueError("renorm_interval and perturbation must be positive")
    if t1 - t0 < 100 * renorm_interval * (1 - 1e-9):
        raise ValueError("span must cover at least 100 renormalization intervals")
    n_renorm = round((t1 - t0) / renorm_interval)
    sub = max(1, math.ceil(renorm_interval / step - 1e-9))
    h = renorm_interval / sub

    base = np.array(state0, dtype=float)
    d = base.shape[0]
    free = np.ones(d, dtype=bool)
    free[list(frozen)] = False

    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d) * free
    direction /= np.linalg.norm(direction)

    if frozen:
        mask = free[:, None].astype(float)

        def field(s, t):
            return rhs(s, t) * mask
    else:
        field = rhs

    pair = np.column_stack([base, base + perturbation * direction])
    t_start_avg = t0 + transient
    total = 0.0
    n_avg = 0
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_renorm):
            for _ in range(sub):
                t = t0 + k * h
                new = _rk4(field, pair, t, h)
                if not np.all(np.isfinite(new)):
                    raise BlowupError("non-finite state during Lyapunov estimation", t)
                pair = new
                k += 1
            sep = pair[:, 1] - pair[:, 0]
            dist = float(np.linalg.norm(sep))
            t_end = t0 + (i + 1) * renorm_interval
            if t_end > t_start_avg + 1e-9:
                total += math.log(dist / perturbation)
                n_avg += 1
            pair[:, 1] = pair[:, 0] + sep * (perturbation / dist)
    if n_avg == 0:
        raise ValueError("transient leaves no intervals to average")
    return LyapunovEstimate(total / (n_avg * renorm_interval), t1 - t0, renorm_interval, n_renorm)


def sign_switch_count(series, window=None) -> int:
    """Number of strict sign changes between adjacent samples.

    ``window`` is an index range ``(start, stop)`` or a slice. Zeros inherit
    the sign of the preceding sample; leading zeros are ignored.
    """
    values = np.asarray(series, dtype=float)
    if window is not None:
        if not isinstance(window, slice):
            window = slice(*window)
        values = values[window]
    if values.size == 0:
        raise ValueError("empty window")
    signs = np.sign(values)
    nz = np.flatnonzero(signs)
    if nz.size == 0:
        return 0
    # forward-fill zeros with the last non-zero sign
    idx = np.maximum.accumulate(np.where(signs != 0, np.arange(signs.size), 0))
    filled = signs[idx][nz[0]:]
    return int(np.count_nonzero(filled[1:] != filled[:-1]))
