"""Scalar LTI plant: exact open- and closed-loop state propagation.

Continuous time follows ``dX/dt = a X + b U`` with piecewise-constant ``U``;
discrete time follows ``X[m+1] = a X[m] + U[m]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class SaturationError(OverflowError):
    """The exact solution left the range of double precision."""


class MalformedSignalError(ValueError):
    """A piecewise-constant input does not cover the requested interval."""


@dataclass(frozen=True)
class PlantParams:
    a: float
    b: float = 1.0
    L: float = 1.0
    discrete: bool = False

    def __post_init__(self):
        if self.discrete and not self.a > 1:
            raise ValueError(f"discrete plant needs a > 1, got a={self.a}")
        if not self.discrete and not self.a > 0:
            raise ValueError(f"continuous plant needs a > 0, got a={self.a}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got L={self.L}")


@dataclass(frozen=True)
class PlantState:
    x: float
    t: float = 0.0


@dataclass(frozen=True)
class PiecewiseConstant:
    """Input signal equal to ``values[j]`` on ``[times[j], times[j+1])``."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) + 1:
            raise MalformedSignalError("need exactly one more breakpoint than values")
        if any(t1 < t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise MalformedSignalError("breakpoints must be nondecreasing")

    @classmethod
    def constant(cls, value: float, t_end: float) -> "PiecewiseConstant":
        return cls((0.0, float(t_end)), (float(value),))

    @classmethod
    def zero(cls, t_end: float) -> "PiecewiseConstant":
        return cls.constant(0.0, t_end)

    def segments(self):
        return zip(self.times[:-1], self.times[1:], self.values)

    def covers(self, t: float) -> bool:
        if not self.values:
            return t == 0
        return self.times[0] <= 0 and self.times[-1] >= t

    def append(self, t_end: float, value: float) -> "PiecewiseConstant":
        return PiecewiseConstant(self.times + (float(t_end),), self.values + (float(value),))


def _exp(z: float) -> float:
    try:
        return math.exp(z)
    except OverflowError as exc:
        raise SaturationError(f"exp({z}) exceeds double range") from exc


def evolve_open_loop(x0: float, a: float, t: float) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if x0 == 0:
        return 0.0
    return x0 * _exp(a * t)


def step_closed_loop_discrete(x: float, a: float, u: float) -> float:
    return a * x + u


def _segment_gain(a: float, t: float, s: float, e: float) -> float:
    # integral of e^{a(t - tau)} over [s, e]
    if a == 0:
        return e - s
    return _exp(a * (t - e)) * math.expm1(a * (e - s)) / a


def control_convolution(a: float, b: float, u: PiecewiseConstant, t: float) -> float:
    """Exact value of ``b * int_0^t e^{a(t-s)} u(s) ds`` for piecewise-constant ``u``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not u.covers(t):
        raise MalformedSignalError(f"input does not cover [0, {t}]")
    total = 0.0
    for s, e, v in u.segments():
        s, e = max(s, 0.0), min(e, t)
        if e <= s or v == 0:
            continue
        total += b * v * _segment_gain(a, t, s, e)
    return total


def closed_loop_state_continuous(x0: float, a: float, b: float,
                                 u: PiecewiseConstant, t: float) -> float:
    return evolve_open_loop(x0, a, t) + control_convolution(a, b, u, t)


def simulate_discrete(x0: float, a: float, inputs: Sequence[float]) -> np.ndarray:
    """Return ``X[0..len(inputs)]`` under ``X[m+1] = a X[m] + U[m]``."""
    xs = np.empty(len(inputs) + 1)
    xs[0] = x0
    for m, u in enumerate(inputs):
        xs[m + 1] = a * xs[m] + u
    return xs


def draw_initial_state(L: float, rng: np.random.Generator) -> float:
    """Uniform draw on the open interval (-L, L)."""
    while True:
        x = rng.uniform(-L, L)
        if -L < x < L:
            return float(x)
