"""Competitive-modes analysis of the reduced water wheel system.

Differentiating the reduced system once more puts each variable in the
oscillator form ``x_i'' = -x_i g_i + h_i``. With the scaled time appended as
a fourth variable (``x_4 = tau``, so ``g_4 = h_4 = 0``) the frequencies are::

    g1 = -sigma^2 - sigma (r - z)
    g2 = -1 - sigma (r - z) + x^2
    g3 = -1 + x^2
    g4 = 0

A pair ``(g_i, g_j)`` is competitive at an instant when the two values are
nearly equal and positive. Since ``g4`` is identically zero, a pair
``(g_i, g4)`` counts as competitive when ``0 < g_i <= eps``.

All evaluation functions take the state with components on the first axis
(``(3,)`` or ``(3, m)``), so whole trajectories are handled in one call.
Parameters may be :class:`~waterwheel.models.ReducedParams` or
:class:`~waterwheel.models.ModeParams`; only ``sigma``, ``r`` and ``mu`` are
used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrate import Trajectory

__all__ = [
    "RESIDUAL_PAIRS",
    "CompetitiveEvent",
    "ConjectureReport",
    "eval_g",
    "eval_h",
    "manifold_residuals",
    "residual_series",
    "classify_region",
    "region_grid",
    "detect_events",
    "check_conjecture",
    "oscillator_residual",
    "pair_name",
]

# order of the six equality manifolds g_i - g_j = 0 (1-based indices)
RESIDUAL_PAIRS = ((1, 4), (2, 4), (3, 4), (1, 2), (2, 3), (1, 3))
_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


def pair_name(pair):
    return f"g{pair[0]}-g{pair[1]}"


def _xyz(s):
    s = np.asarray(s, dtype=float)
    return s[0], s[1], s[2]


def eval_g(s, tau, p):
    x, _, z = _xyz(s)
    sigma = p.sigma
    rz = p.r(tau) - z
    x2 = x * x
    g1 = -sigma * sigma - sigma * rz
    g2 = -1.0 - sigma * rz + x2
    g3 = -1.0 + x2
    return np.array(np.broadcast_arrays(g1, g2, g3, np.zeros_like(g3)))


def eval_h(s, tau, p):
    """The state-dependent forcing terms of the oscillator form.

    The ``mu'`` term of ``h2`` enters with a plus sign, as obtained by
    differentiating ``y' = r x - y - x z + mu`` once more.
    """
    x, y, z = _xyz(s)
    sigma = p.sigma
    r = p.r(tau)
    dr = p.r.eval_deriv(tau, 1)
    ddr = p.r.eval_deriv(tau, 2)
    mu = p.mu(tau)
    dmu = p.mu.eval_deriv(tau, 1)
    h1 = sigma * mu - (sigma + sigma * sigma) * y
    h2 = -mu + dmu - (1.0 + sigma) * r * x + (2.0 + sigma) * x * z
    h3 = -dr + ddr + mu * x - (2.0 + sigma) * x * y + r * x * x + sigma * y * y
    return np.array(np.broadcast_arrays(h1, h2, h3, np.zeros_like(h3)))


def manifold_residuals(s, tau, p):
    """``(g1-g4, g2-g4, g3-g4, g1-g2, g2-g3, g1-g3)``; zero means on-manifold."""
    g = eval_g(s, tau, p)
    return np.array([g[i - 1] - g[j - 1] for i, j in RESIDUAL_PAIRS])


def residual_series(traj: Trajectory, p):
    """Manifold residuals along a trajectory, shape ``(len(traj), 6)``."""
    return manifold_residuals(traj.states[:, :3].T, traj.times, p).T


def _capable(pair, sigma):
    # g1 = g2 requires x^2 = 1 - sigma^2, which has no real root for sigma > 1
    return pair != (1, 2) or sigma <= 1.0


def _pair_positive(g, pair):
    i, j = pair
    if j == 4:
        return g[i - 1] > 0
    return (g[i - 1] > 0) & (g[j - 1] > 0)


def classify_region(x, z, tau, p):
    """True where some competitive-capable pair of g's is positive."""
    x, z = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(z, dtype=float))
    g = eval_g((x, np.zeros_like(x), z), tau, p)
    out = np.zeros(x.shape, dtype=bool)
    for pair in _PAIRS:
        if _capable(pair, p.sigma):
            out |= _pair_positive(g, pair)
    return out if out.ndim else bool(out)


def region_grid(p, tau, x_range=(-30.0, 30.0), z_range=(-10.0, 110.0), n=601):
    """Classify an ``n x n`` grid of the x-z plane at time ``tau``.

    Returns ``(xs, zs, mask)`` with ``mask[k, l]`` for ``zs[k]``, ``xs[l]``.
    """
    xs = np.linspace(x_range[0], x_range[1], n)
    zs = np.linspace(z_range[0], z_range[1], n)
    X, Z = np.meshgrid(xs, zs)
    return xs, zs, classify_region(X, Z, float(tau), p)


@dataclass(frozen=True)
class CompetitiveEvent:
    tau: float
    pair: tuple
    g_value: float
    residual: float


@dataclass(frozen=True)
class ConjectureReport:
    conditions: tuple
    events: list = field(repr=False)
    pair_counts: dict
    region_fraction: float
    explicit_time_dependence: bool

    @property
    def all_satisfied(self) -> bool:
        return all(self.conditions)


def detect_events(traj: Trajectory, p, eps: float = 0.5):
    """Scan sampled output for competitive pairs.

    A sample yields an event for ``(g_i, g_j)`` when ``|g_i - g_j| <= eps``
    and both are positive, or, for pairs with ``g4``, when
    ``0 < g_i <= eps``. Events are ordered by time, then pair.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if not eps > 0:
        raise ValueError("eps must be positive")
    g = eval_g(traj.states[:, :3].T, traj.times, p)
    hits = {}
    for pair in _PAIRS:
        i, j = pair
        gi, gj = g[i - 1], g[j - 1]
        resid = np.abs(gi - gj)
        mask = (resid <= eps) & _pair_positive(g, pair)
        value = gi if j == 4 else 0.5 * (gi + gj)
        hits[pair] = (np.flatnonzero(mask), value, resid)
    events = []
    for pair in _PAIRS:
        idx, value, resid = hits[pair]
        events.extend(
            CompetitiveEvent(float(traj.times[k]), pair, float(value[k]), float(resid[k])) for k in idx
        )
    events.sort(key=lambda e: (e.tau, e.pair))
    return events


def check_conjecture(traj: Trajectory, p, eps: float = 0.5) -> ConjectureReport:
    """Evaluate the four necessary conditions for chaos along ``traj``.

    Conditions 1, 3 and 4 are structural for this system: there are four
    g's, g1..g3 vary with the evolving state (and g1, g2 also with ``r``),
    and every h depends on the state. Condition 2 holds iff at least one
    competitive event is detected.
    """
    events = detect_events(traj, p, eps)
    counts = {pair_name(pair): 0 for pair in _PAIRS}
    for e in events:
        counts[pair_name(e.pair)] += 1
    inside = classify_region(traj.states[:, 0], traj.states[:, 2], traj.times, p)
    conditions = (True, bool(events), True, True)
    return ConjectureReport(
        conditions=conditions,
        events=events,
        pair_counts=counts,
        region_fraction=float(np.mean(inside)),
        explicit_time_dependence=not p.r.is_constant,
    )


def oscillator_residual(traj: Trajectory, p):
    """``|D2 x_i - (-x_i g_i + h_i)|`` at interior samples, shape ``(m-2, 3)``.

    ``D2`` is the central second difference on the sample grid, so the
    residual of a smooth trajectory decays like ``dt**2``. The appended time
    variable is omitted; its second derivative and its g, h all vanish.
    """
    if len(traj) < 3:
        raise ValueError("need at least three samples")
    u = traj.states[:, :3]
    dt = traj.dt
    d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dt * dt)
    s = u[1:-1].T
    tau = traj.times[1:-1]
    g = eval_g(s, tau, p)[:3]
    h = eval_h(s, tau, p)[:3]
    return np.abs(d2 - (-s * g + h).T)
