"""Closed-form forcing functions of scaled time with exact derivatives.

The inflow harmonics that drive the wheel are built from a small expression
grammar: constants, sinusoids, tanh steps and affine combinations of those.
Every node knows its own first and second derivative, so quantities such as
the second derivative of ``r`` never go through numerical differencing.

Nodes are immutable and can be combined with ``+``, ``-`` and scalar ``*``::

    r = 50 + Sinusoid(0.5, 10.0) + TanhStep(-21.5, 20.0) + TanhStep(-28.0, 40.0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

__all__ = [
    "TimeFunction",
    "Constant",
    "Sinusoid",
    "TanhStep",
    "Affine",
    "eval_deriv",
    "freeze",
    "time_scaled",
    "make_reference_forcings",
    "from_dict",
]

_ORDERS = (0, 1, 2)


def _check_order(order):
    if order not in _ORDERS:
        raise ValueError(f"derivative order must be 0, 1 or 2, got {order!r}")


def _is_scalar(tau):
    # math is several times faster than numpy ufuncs on plain floats, and the
    # integrators call forcings once per stage
    return isinstance(tau, (float, int))


class TimeFunction:
    """Base class for forcing expressions f(tau)."""

    def eval_deriv(self, tau, order=0):
        raise NotImplementedError

    def __call__(self, tau):
        return self.eval_deriv(tau, 0)

    def deriv(self, tau):
        return self.eval_deriv(tau, 1)

    def deriv2(self, tau):
        return self.eval_deriv(tau, 2)

    @property
    def is_constant(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError

    # affine arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TimeFunction):
            return Affine.combine([(1.0, self), (1.0, other)])
        if np.isscalar(other):
            return Affine.combine([(1.0, self)], offset=float(other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Affine.combine([(-1.0, self)])

    def __sub__(self, other):
        if isinstance(other, TimeFunction):
            return Affine.combine([(1.0, self), (-1.0, other)])
        if np.isscalar(other):
            return Affine.combine([(1.0, self)], offset=-float(other))
        return NotImplemented

    def __rsub__(self, other):
        if np.isscalar(other):
            return Affine.combine([(-1.0, self)], offset=float(other))
        return NotImplemented

    def __mul__(self, other):
        if np.isscalar(other):
            return Affine.combine([(float(other), self)])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return Affine.combine([(1.0 / float(other), self)])
        return NotImplemented


@dataclass(frozen=True, eq=True)
class Constant(TimeFunction):
    value: float

    def eval_deriv(self, tau, order=0):
        _check_order(order)
        c = self.value if order == 0 else 0.0
        if _is_scalar(tau) or np.ndim(tau) == 0:
            return c
        return np.full(np.shape(tau), c)

    @property
    def is_constant(self):
        return True

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True, eq=True)
class Sinusoid(TimeFunction):
    """``amplitude * sin(frequency * tau + phase)``."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def eval_deriv(self, tau, order=0):
        _check_order(order)
        arg = self.frequency * tau + self.phase
        sin, cos = (math.sin, math.cos) if _is_scalar(tau) else (np.sin, np.cos)
        if order == 0:
            return self.amplitude * sin(arg)
        if order == 1:
            return self.amplitude * self.frequency * cos(arg)
        return -self.amplitude * self.frequency**2 * sin(arg)

    def to_dict(self):
        return {
            "kind": "sinusoid",
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self.phase,
        }


@dataclass(frozen=True, eq=True)
class TanhStep(TimeFunction):
    """Smoothed step ``amplitude * tanh(rate * (center - tau))``.

    With ``rising=True`` the argument is ``rate * (tau - center)`` instead.
    ``rate`` defaults to 1 and only differs from it after a change of time
    unit (see :func:`time_scaled`).
    """

    amplitude: float
    center: float
    rising: bool = False
    rate: float = 1.0

    def eval_deriv(self, tau, order=0):
        _check_order(order)
        slope = self.rate if self.rising else -self.rate
        tanh = math.tanh if _is_scalar(tau) else np.tanh
        th = tanh(slope * (tau - self.center))
        if order == 0:
            return self.amplitude * th
        sech2 = 1.0 - th * th
        if order == 1:
            return self.amplitude * slope * sech2
        return -2.0 * self.amplitude * slope * slope * th * sech2

    def to_dict(self):
        return {
            "kind": "tanh_step",
            "amplitude": self.amplitude,
            "center": self.center,
            "rising": self.rising,
            "rate": self.rate,
        }


@dataclass(frozen=True, eq=True)
class Affine(TimeFunction):
    """``offset + sum(weight * f)`` over child expressions."""

    terms: tuple = ()
    offset: float = 0.0

    @classmethod
    def combine(cls, terms, offset=0.0):
        # flatten nested affine nodes and fold constants into the offset
        flat = []
        for w, f in terms:
            if isinstance(f, Affine):
                offset += w * f.offset
                flat.extend((w * cw, cf) for cw, cf in f.terms)
            elif isinstance(f, Constant):
                offset += w * f.value
            else:
                flat.append((w, f))
        return cls(tuple(flat), float(offset))

    def eval_deriv(self, tau, order=0):
        _check_order(order)
        total = self.offset if order == 0 else 0.0
        for w, f in self.terms:
            total = total + w * f.eval_deriv(tau, order)
        if not _is_scalar(tau) and np.ndim(total) != np.ndim(tau):
            total = np.full(np.shape(tau), total)
        return total

    @property
    def is_constant(self):
        return all(f.is_constant for _, f in self.terms)

    def to_dict(self):
        return {
            "kind": "affine",
            "offset": self.offset,
            "terms": [{"weight": w, "f": f.to_dict()} for w, f in self.terms],
        }


def eval_deriv(f: TimeFunction, tau, order: int = 0):
    """Evaluate ``f`` or its exact first/second derivative at ``tau``."""
    return f.eval_deriv(tau, order)


def freeze(f: TimeFunction, tau0: float) -> Constant:
    """Constant function holding the value ``f(tau0)``."""
    if not np.isfinite(tau0):
        raise ValueError("freeze time must be finite")
    return Constant(float(f(tau0)))


def time_scaled(f: TimeFunction, k: float) -> TimeFunction:
    """Return ``g`` with ``g(t) = f(k * t)``; used for time-unit changes."""
    if isinstance(f, Constant):
        return f
    if isinstance(f, Sinusoid):
        return Sinusoid(f.amplitude, f.frequency * k, f.phase)
    if isinstance(f, TanhStep):
        # tanh(rate*(c - k t)) = tanh(rate*k*(c/k - t))
        return TanhStep(f.amplitude, f.center / k, f.rising, f.rate * k)
    if isinstance(f, Affine):
        return Affine(tuple((w, time_scaled(g, k)) for w, g in f.terms), f.offset)
    raise TypeError(f"unsupported node {type(f).__name__}")


def make_reference_forcings():
    """The inflow harmonics of the reference experiments.

    Returns ``(r, mu, p2, q2)`` with ``mu = 1``, ``p2 = mu/100``,
    ``q2 = r/100`` and
    ``r = 50 + 0.5 sin(10 tau) - 21.5 tanh(20 - tau) - 28 tanh(40 - tau)``.
    """
    r = Affine(
        (
            (1.0, Sinusoid(0.5, 10.0)),
            (1.0, TanhStep(-21.5, 20.0)),
            (1.0, TanhStep(-28.0, 40.0)),
        ),
        offset=50.0,
    )
    mu = Constant(1.0)
    p2 = scaled(mu, 0.01)
    q2 = scaled(r, 0.01)
    return r, mu, p2, q2


def scaled(f: TimeFunction, c: float) -> TimeFunction:
    """``c * f``, keeping constants as constants."""
    if isinstance(f, Constant):
        return Constant(c * f.value)
    return Affine.combine([(c, f)])


def from_dict(d: Mapping[str, Any]) -> TimeFunction:
    """Inverse of :meth:`TimeFunction.to_dict`."""
    try:
        kind = d["kind"]
        if kind == "constant":
            return Constant(float(d["value"]))
        if kind == "sinusoid":
            return Sinusoid(float(d["amplitude"]), float(d["frequency"]), float(d.get("phase", 0.0)))
        if kind == "tanh_step":
            return TanhStep(
                float(d["amplitude"]),
                float(d["center"]),
                bool(d.get("rising", False)),
                float(d.get("rate", 1.0)),
            )
        if kind == "affine":
            terms = tuple((float(t["weight"]), from_dict(t["f"])) for t in d.get("terms", ()))
            return Affine(terms, float(d.get("offset", 0.0)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed forcing description: {d!r}") from exc
    raise ValueError(f"unknown forcing kind {kind!r}")
