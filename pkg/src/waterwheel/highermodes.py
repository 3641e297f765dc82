"""Behaviour of the higher Fourier modes ``(a_n, b_n)``.

Each mode obeys ``a' = n w b - K a + p``, ``b' = -n w a - K b + q``. The
leak term pulls the squared amplitude toward a circle through the origin
centred at ``(p/2K, q/2K)``; the circle moves with the forcing. For zero
initial amplitudes the mode can also be written as a series of iterated
integrals of the angular velocity ``w``, which serves here as an independent
short-horizon check on direct integration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .integrate import Trajectory
from .models import ModeParams

__all__ = [
    "EvolvingCircle",
    "SeriesTerms",
    "SeriesTruncationWarning",
    "evolving_circle",
    "radial_balance_residual",
    "series_terms",
    "series_solution",
]

TRUNCATION_RATIO = 1e-3


class SeriesTruncationWarning(UserWarning):
    """The last retained series term is not negligible."""


@dataclass(frozen=True)
class EvolvingCircle:
    center: tuple
    radius: float
    tau: float


def evolving_circle(n: int, tau: float, p: ModeParams, K: float = 1.0) -> EvolvingCircle:
    """Attracting circle of mode ``n`` at ``tau``.

    For ``n = 1`` the scaled forcings are ``(mu, r)``, so the circle lives in
    the ``(y, r - z)`` plane.
    """
    pn, qn = p.forcing(n)
    ca = pn(tau) / (2.0 * K)
    cb = qn(tau) / (2.0 * K)
    return EvolvingCircle((ca, cb), float(np.hypot(ca, cb)), tau)


def radial_balance_residual(a, b, da, db, p, q, K=1.0):
    """Absolute defect of the radial balance identity

    ``-(a a' + b b')/K = (a - p/2K)^2 + (b - q/2K)^2 - (p/2K)^2 - (q/2K)^2``.

    Derivatives consistent with the mode equations give zero up to rounding,
    because the rotation terms cancel in ``a a' + b b'``.
    """
    lhs = -(a * da + b * db) / K
    pc, qc = p / (2.0 * K), q / (2.0 * K)
    rhs = (a - pc) ** 2 + (b - qc) ** 2 - pc**2 - qc**2
    return np.abs(lhs - rhs)


@dataclass(frozen=True)
class SeriesTerms:
    """Cumulative quadratures on the sample grid.

    ``P[k]`` and ``Q[k]`` are arrays over ``times`` with ``P[0] = int e^{Ks} p``
    and ``P[k] = int w P[k-1]`` (same for ``Q``); ``Omega = int w``.
    """

    times: np.ndarray
    Omega: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    k_max: int


def series_terms(omega: Trajectory, p, q, K: float = 1.0, k_max: int = 8) -> SeriesTerms:
    """Build the iterated integrals from sampled angular velocity.

    ``omega`` supplies the time grid and, in its first component, the angular
    velocity (in scaled units ``w = x``).
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    t = omega.times
    if not math.isclose(t[0], 0.0, abs_tol=1e-12):
        raise ValueError("angular velocity samples must start at t = 0")
    w = omega.states[:, 0]
    ekt = np.exp(K * t)
    P = np.empty((k_max + 1, len(t)))
    Q = np.empty((k_max + 1, len(t)))
    P[0] = cumulative_trapezoid(ekt * p(t), t, initial=0.0)
    Q[0] = cumulative_trapezoid(ekt * q(t), t, initial=0.0)
    for k in range(1, k_max + 1):
        P[k] = cumulative_trapezoid(w * P[k - 1], t, initial=0.0)
        Q[k] = cumulative_trapezoid(w * Q[k - 1], t, initial=0.0)
    Omega = cumulative_trapezoid(w, t, initial=0.0)
    return SeriesTerms(t, Omega, P, Q, k_max)


def _interp(terms: SeriesTerms, values, tau):
    return float(np.interp(tau, terms.times, values))


def series_solution(n, omega: Trajectory, p, q, K=1.0, k_max=8, tau=None, a0=0.0, b0=0.0,
                    terms: SeriesTerms | None = None):
    """Truncated iterated-integral solution ``(a(tau), b(tau))`` of mode ``n``.

    Terms ``P_0..P_kmax`` and ``Q_0..Q_kmax`` are kept. Non-zero ``a0, b0``
    add the exact homogeneous rotation ``e^{-K t} R(n Omega) (a0, b0)``.
    Issues :class:`SeriesTruncationWarning` when the last retained term
    exceeds ``1e-3`` of the partial sum.
    """
    if terms is None:
        terms = series_terms(omega, p, q, K, k_max)
    elif terms.k_max < k_max:
        raise ValueError("precomputed terms do not reach k_max")
    if tau is None:
        tau = float(terms.times[-1])
    if not terms.times[0] <= tau <= terms.times[-1] + 1e-12:
        raise ValueError(f"tau = {tau} outside sampled range [{terms.times[0]}, {terms.times[-1]}]")

    sum_a = 0.0
    sum_b = 0.0
    last = 0.0
    for k in range(k_max + 1):
        Pk = _interp(terms, terms.P[k], tau)
        Qk = _interp(terms, terms.Q[k], tau)
        nk = float(n) ** k
        if k % 2 == 0:
            sign = (-1.0) ** (k // 2)
            da, db = sign * nk * Pk, sign * nk * Qk
        else:
            sign = (-1.0) ** ((k - 1) // 2)
            da, db = sign * nk * Qk, -sign * nk * Pk
        sum_a += da
        sum_b += db
        last = math.hypot(da, db)

    size = math.hypot(sum_a, sum_b)
    if size > 0 and last > TRUNCATION_RATIO * size:
        warnings.warn(
            f"series truncated at k_max={k_max} with last term {last:.3g} "
            f"against partial sum {size:.3g}",
            SeriesTruncationWarning,
            stacklevel=2,
        )
    decay = math.exp(-K * tau)
    phase = n * _interp(terms, terms.Omega, tau)
    a = decay * (a0 * math.cos(phase) + b0 * math.sin(phase) + sum_a)
    b = decay * (-a0 * math.sin(phase) + b0 * math.cos(phase) + sum_b)
    return a, b
