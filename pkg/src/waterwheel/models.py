"""Right-hand sides of the water wheel systems and the reference scenarios.

Three systems are provided:

* the reduced three-variable system in scaled time ``tau``::

      x' = sigma (y - x)
      y' = r(tau) x - y - x z + mu(tau)
      z' = x y - z + r'(tau)

* the dimensional lowest-mode system in ``(a1, b1, omega)``;
* the scaled multi-mode system: the reduced system for ``n = 1`` plus, for
  ``n >= 2``, ``a_n' = n x b_n - a_n + p_n``, ``b_n' = -n x a_n - b_n + q_n``.

States are plain numpy arrays. A mode state is laid out as
``[x, y, z, a2, b2, a3, b3, ...]``. All right-hand sides accept states of
shape ``(d,)`` or ``(d, m)`` (``m`` stacked copies) so that a base and a
shadow trajectory can be advanced together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .forcing import Constant, TimeFunction, freeze, make_reference_forcings, scaled, time_scaled

__all__ = [
    "ReducedParams",
    "DimensionalParams",
    "ModeParams",
    "reduced_rhs",
    "dimensional_rhs",
    "mode_rhs",
    "lorenz_rhs",
    "reduced_divergence",
    "dimensional_from_reduced",
    "reduced_to_dimensional",
    "SCENARIOS",
    "STEADY_FREEZE_TIME",
    "make_scenario",
    "mode_labels",
]

SCENARIOS = ("unsteady-asymmetric", "unsteady-symmetric", "steady-asymmetric")
STEADY_FREEZE_TIME = 30.0
REFERENCE_SIGMA = 5.0
REFERENCE_SPAN = (0.0, 60.0)


@dataclass(frozen=True)
class ReducedParams:
    sigma: float
    r: TimeFunction
    mu: TimeFunction

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DimensionalParams:
    """Physical parameters of the lowest-mode system.

    ``p1`` and ``q1`` are the first sine/cosine harmonics of the inflow as
    functions of dimensional time.
    """

    K: float
    nu: float
    I: float
    g: float
    R: float
    p1: TimeFunction = Constant(0.0)
    q1: TimeFunction = Constant(0.0)

    def __post_init__(self):
        for name in ("K", "nu", "I", "g", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ModeParams:
    """Scaled multi-mode parameters.

    ``p`` and ``q`` hold the forcings of modes ``n = 2..N`` in order; the
    ``n = 1`` forcings are ``mu`` and ``r`` of the reduced system.
    """

    sigma: float
    r: TimeFunction
    mu: TimeFunction
    p: tuple = field(default=())
    q: tuple = field(default=())

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if len(self.p) != len(self.q):
            raise ValueError("p and q must list the same number of modes")

    @property
    def N(self) -> int:
        return 1 + len(self.p)

    def reduced(self) -> ReducedParams:
        return ReducedParams(self.sigma, self.r, self.mu)

    def forcing(self, n: int):
        """Return ``(p_n, q_n)`` in scaled units for ``1 <= n <= N``."""
        if not 1 <= n <= self.N:
            raise ValueError(f"mode index {n} outside 1..{self.N}")
        if n == 1:
            return self.mu, self.r
        return self.p[n - 2], self.q[n - 2]


def reduced_rhs(s, tau, p: ReducedParams):
    x, y, z = s[0], s[1], s[2]
    return np.array(
        [
            p.sigma * (y - x),
            p.r(tau) * x - y - x * z + p.mu(tau),
            x * y - z + p.r.eval_deriv(tau, 1),
        ]
    )


def dimensional_rhs(s, t, p: DimensionalParams):
    a1, b1, omega = s[0], s[1], s[2]
    return np.array(
        [
            omega * b1 - p.K * a1 + p.p1(t),
            -omega * a1 - p.K * b1 + p.q1(t),
            (-p.nu * omega + math.pi * p.g * p.R * a1) / p.I,
        ]
    )


def mode_rhs(s, tau, p: ModeParams):
    x, y, z = s[0], s[1], s[2]
    out = [
        p.sigma * (y - x),
        p.r(tau) * x - y - x * z + p.mu(tau),
        x * y - z + p.r.eval_deriv(tau, 1),
    ]
    for k, (pn, qn) in enumerate(zip(p.p, p.q)):
        n = k + 2
        a, b = s[3 + 2 * k], s[4 + 2 * k]
        out.append(n * x * b - a + pn(tau))
        out.append(-n * x * a - b + qn(tau))
    return np.array(out)


def lorenz_rhs(s, t, sigma, rho, beta):
    x, y, z = s[0], s[1], s[2]
    return np.array([sigma * (y - x), rho * x - y - x * z, x * y - beta * z])


def reduced_divergence(p: ReducedParams) -> float:
    """Trace of the Jacobian of the reduced field, ``-sigma - 2``."""
    return -p.sigma - 2.0


def dimensional_from_reduced(p: ReducedParams, K=1.0, I=1.0, g=1.0, R=1.0 / math.pi):
    """Physical parameters whose lowest-mode dynamics rescale to ``p``.

    Uses ``nu = I K sigma``, ``p1 = (K^2 nu / (pi g R)) mu`` and
    ``q1 = (K^2 nu / (pi g R)) r``, with the forcings re-expressed in
    dimensional time ``t = tau / K``.
    """
    nu = I * K * p.sigma
    c = K * K * nu / (math.pi * g * R)
    p1 = scaled(time_scaled(p.mu, K), c)
    q1 = scaled(time_scaled(p.r, K), c)
    return DimensionalParams(K=K, nu=nu, I=I, g=g, R=R, p1=p1, q1=q1)


def reduced_to_dimensional(states, taus, p: ReducedParams, d: DimensionalParams):
    """Map reduced states ``(x, y, z)`` at scaled times to ``(a1, b1, omega)``.

    ``states`` has shape ``(m, 3)``; returns ``(t, dimensional_states)``.
    """
    states = np.asarray(states, dtype=float)
    taus = np.asarray(taus, dtype=float)
    c = d.K * d.nu / (math.pi * d.g * d.R)
    x, y, z = states[..., 0], states[..., 1], states[..., 2]
    a1 = c * y
    # b1 = -c z + q1/K with q1 = K c r
    b1 = c * (p.r(taus) - z)
    omega = d.K * x
    return taus / d.K, np.stack([a1, b1, omega], axis=-1)


def mode_labels(N: int):
    labels = ["x", "y", "z"]
    for n in range(2, N + 1):
        labels += [f"a{n}", f"b{n}"]
    return tuple(labels)


def make_scenario(kind: str, x0: float, sigma: float = REFERENCE_SIGMA, r=None, mu=None):
    """Build one of the three reference wheels.

    Returns ``(params, state0, span)``; the state is ``[x0, 0, r(0), 0, 0]``
    and the span is ``(0, 60)``. ``r`` and ``mu`` replace the reference
    forcings; ``p2 = mu/100`` and ``q2 = r/100`` follow them.
    """
    if kind not in SCENARIOS:
        raise ValueError(f"unknown scenario {kind!r}; expected one of {', '.join(SCENARIOS)}")
    r0, mu0, p2, q2 = make_reference_forcings()
    if r is not None or mu is not None:
        r = r0 if r is None else r
        mu = mu0 if mu is None else mu
        p2, q2 = scaled(mu, 0.01), scaled(r, 0.01)
    else:
        r, mu = r0, mu0
    if kind == "unsteady-symmetric":
        mu = Constant(0.0)
        p2 = scaled(mu, 0.01)
    elif kind == "steady-asymmetric":
        r = freeze(r, STEADY_FREEZE_TIME)
        q2 = scaled(r, 0.01)
    params = ModeParams(sigma, r, mu, (p2,), (q2,))
    state0 = np.array([float(x0), 0.0, float(r(0.0)), 0.0, 0.0])
    return params, state0, REFERENCE_SPAN
