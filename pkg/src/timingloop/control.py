"""Anytime state estimation and certainty-equivalent control."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .plant import PiecewiseConstant, control_convolution, evolve_open_loop
from .quantizer import BitPath


class ErrorBehavior(str, enum.Enum):
    """What the controller does between an erroneous decode and the next decode."""

    OPEN_LOOP = "open_loop"
    PREVIOUS_ESTIMATE = "previous_estimate"
    OPPOSITE_CONTROL = "opposite_control"


@dataclass
class EstimatorState:
    x0_hat: float = 0.0
    bits_resolved: int = 0
    last_decode_time: float = 0.0
    input_log: list = field(default_factory=list)
    in_error: bool = False

    def log_input(self, t: float, u: float) -> None:
        self.input_log.append((t, u))


def estimate_state_discrete(x0_hat: float, a: float, inputs: Sequence[float], m: int) -> float:
    """``a^m x0_hat + sum_j a^(m-1-j) U[j]`` by forward recursion."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if len(inputs) < m:
        raise ValueError(f"need inputs through step {m - 1}")
    x = x0_hat
    for j in range(m):
        x = a * x + inputs[j]
    return x


def estimate_state_continuous(x0_hat: float, a: float, b: float,
                              input_log: PiecewiseConstant, t: float) -> float:
    return evolve_open_loop(x0_hat, a, t) + control_convolution(a, b, input_log, t)


def hold_extrapolate(x_hat_at_decode: float, a: float, dt: float, discrete: bool = False) -> float:
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if discrete:
        if int(dt) != dt:
            raise ValueError("discrete extrapolation needs an integer number of steps")
        return x_hat_at_decode * a ** int(dt)
    return x_hat_at_decode * math.exp(a * dt)


def control_input(x_hat: float, k: float, behavior: ErrorBehavior | None = None,
                  in_error: bool = False) -> float:
    """``-k x_hat``; flipped or zeroed while an error episode is in force."""
    if in_error and behavior is ErrorBehavior.OPEN_LOOP:
        return 0.0
    if in_error and behavior is ErrorBehavior.OPPOSITE_CONTROL:
        return k * x_hat
    return -k * x_hat + 0.0  # no negative zero in outputs


def gain_is_stabilizing(a: float, b: float, k: float, discrete: bool = False) -> bool:
    if discrete:
        return abs(a - b * k) < 1
    return a - b * k < 0


def wrong_path(true_path: BitPath, rng: np.random.Generator) -> BitPath:
    """Uniformly random path of the same depth, different from ``true_path``.

    The empty path has no alternative and is returned unchanged.
    """
    if true_path.depth == 0:
        return true_path
    while True:
        bits = tuple(int(b) for b in rng.integers(0, 2, size=true_path.depth))
        if bits != true_path.bits:
            return BitPath(bits)
