"""Single closed-loop episodes of the discrete-time plant ``X[m+1] = a X[m] + b U[m]``.

The estimator tracks ``X(0)`` through the quantizer and forms
``X_hat[m] = a^m X0_hat + sum_j a^(m-1-j) b U[j]``. Since the true state obeys
the same recursion from ``X(0)``, ``X_hat[m] = X[m] - a^m (X(0) - X0_hat)``; the
simulator uses that form with the residual ``X(0) - X0_hat`` evaluated exactly,
which keeps the estimate meaningful long after ``a^m`` has outgrown double
precision of either term alone.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..channel import DelayModel, count_received_by, transmit
from ..codec import DecodeSchedule, ResourceError, build_codebook, decode_path, encode
from ..control import ErrorBehavior, control_input, wrong_path
from ..plant import draw_initial_state
from ..quantizer import quantize, residual
from .config import ABSTRACT, ExperimentConfig

TRACE_COLUMNS = ("m", "x", "u", "x_hat", "decode_event", "decode_correct", "bits_resolved")
TRACE_SCHEMA = "timingloop.trace/v1"

LQR_STEPS = 200
_CEIL_SLACK = 1e-9

# substream keys inside one episode
_X0, _RECEPTIONS, _COIN, _WRONG, _CODEBOOK = range(5)


@dataclass
class SimTrace:
    """Per-step record of one episode. Arrays stop early if the state diverged."""

    m: np.ndarray
    x: np.ndarray
    u: np.ndarray
    x_hat: np.ndarray
    decode_event: np.ndarray
    decode_correct: np.ndarray
    bits_resolved: np.ndarray
    x0: float
    success: bool
    diverged: bool
    reception_steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def final_abs_state(self) -> float:
        return float(abs(self.x[-1]))

    @property
    def max_abs_state(self) -> float:
        return float(np.max(np.abs(self.x)))

    @property
    def lqr_cost(self) -> float:
        try:
            return lqr_cost(self)
        except ValueError:
            return math.inf

    def rows(self):
        for i in range(len(self.m)):
            yield (int(self.m[i]), float(self.x[i]), float(self.u[i]), float(self.x_hat[i]),
                   int(self.decode_event[i]), int(self.decode_correct[i]),
                   int(self.bits_resolved[i]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {TRACE_SCHEMA}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for row in self.rows():
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def lqr_cost(trace: SimTrace) -> float:
    """``(1/200) [sum_{m<200} (0.01 X^2 + 0.5 U^2) + 0.01 X[200]^2]``.

    A trace stopped by the divergence guard before step 200 costs ``inf``.
    """
    if trace.diverged and len(trace.m) <= LQR_STEPS:
        return math.inf
    if len(trace.m) <= LQR_STEPS:
        raise ValueError(f"LQR cost needs a horizon of at least {LQR_STEPS} steps")
    x = trace.x[:LQR_STEPS]
    u = trace.u[:LQR_STEPS]
    total = np.sum(0.01 * x**2 + 0.5 * u**2) + 0.01 * trace.x[LQR_STEPS] ** 2
    return float(total / LQR_STEPS)


def bits_at_reception(k: int, mean_d: float, capacity_bits: float) -> int:
    """``ceil(k E(D) C)`` source bits are resolved at the k-th reception."""
    return max(0, math.ceil(k * mean_d * capacity_bits - _CEIL_SLACK))


def geometric_reception_steps(mean_d: float, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Reception steps ``<= horizon`` with i.i.d. geometric gaps on {1, 2, ...}."""
    gaps = rng.geometric(1.0 / mean_d, size=horizon + 1)
    steps = np.cumsum(gaps)
    return steps[steps <= horizon]


class _AbstractDecoder:
    """Correct-estimate coin with ``P_e = exp(-eta k)`` at the k-th reception."""

    def __init__(self, config: ExperimentConfig, x0: float, streams):
        self.config = config
        self.x0 = x0
        self.steps = geometric_reception_steps(config.mean_d, config.horizon, streams[_RECEPTIONS])
        self.coin = streams[_COIN]
        self.wrong = streams[_WRONG]
        self.k = 0

    def receptions_by(self, m: int) -> int:
        return int(np.searchsorted(self.steps, m, side="right"))

    def decode(self, k: int):
        cfg = self.config
        bits = bits_at_reception(k, cfg.mean_d, cfg.capacity_bits)
        true_path = quantize(self.x0, cfg.L, bits)
        p_error = math.exp(-cfg.eta * k)
        if self.coin.random() >= p_error:
            return true_path, True
        return wrong_path(true_path, self.wrong), False


class _CodedDecoder:
    """Real codebook over an exponential-delay channel; steps are time units."""

    def __init__(self, config: ExperimentConfig, x0: float, streams):
        self.config = config
        self.x0 = x0
        self.model = DelayModel.exponential(config.mean_s)
        self.schedule = DecodeSchedule(config.rate_nats, math.e * config.mean_s)
        n = self.schedule.max_symbols(config.max_bits)
        expected = config.horizon / self.schedule.mean_d
        if n < 1 or n < expected:
            raise ResourceError(
                f"a horizon of {config.horizon} steps needs about {math.ceil(expected)} symbols, "
                f"but max_bits={config.max_bits} allows {n}; shorten the horizon or "
                "use abstract-error mode")
        book = build_codebook(n, self.schedule.bits_at(n), config.mean_s,
                              int(streams[_CODEBOOK].integers(2**31)),
                              rate_nats=config.rate_nats, max_bits=config.max_bits, redraws=0)
        self.codebook = book
        trace = transmit(encode(x0, config.L, self.schedule, book), self.model, streams[_RECEPTIONS])
        self.channel = trace
        self.steps = np.ceil(trace.reception_times).astype(int)

    def receptions_by(self, m: int) -> int:
        return count_received_by(self.channel, float(m))

    def decode(self, k: int):
        path = decode_path(self.codebook, self.channel.inter_reception[:k], self.model)
        return path, path == quantize(self.x0, self.config.L, path.depth)


def run_episode(config: ExperimentConfig, episode_seed) -> SimTrace:
    """Simulate steps ``0..horizon`` of one episode.

    ``episode_seed`` is anything ``np.random.SeedSequence`` accepts. In
    abstract mode decode outcomes come from the error coin and a wrong
    estimate is a uniformly random path of the same depth. In full-coding
    mode the controller cannot tell a wrong decode from a right one, so it
    always applies the nominal law.
    """
    seq = episode_seed if isinstance(episode_seed, np.random.SeedSequence) \
        else np.random.SeedSequence(episode_seed)
    streams = [np.random.default_rng(s) for s in seq.spawn(5)]
    cfg = config
    a, b = cfg.a, cfg.b
    abstract = cfg.mode == ABSTRACT
    behavior = cfg.behavior if abstract else None
    x0 = draw_initial_state(cfg.L, streams[_X0])
    decoder = _AbstractDecoder(cfg, x0, streams) if abstract else _CodedDecoder(cfg, x0, streams)

    n = cfg.horizon + 1
    xs, us, xh = np.zeros(n), np.zeros(n), np.zeros(n)
    events, correct, bits = np.zeros(n, dtype=bool), np.zeros(n, dtype=bool), np.zeros(n, dtype=int)

    delta = x0   # X(0) - X0_hat, with X0_hat = 0 before the first decode
    depth = 0
    in_error = False
    k = 0
    x = x0
    u = 0.0
    diverged = False
    last = cfg.horizon
    for m in range(n):
        k_now = decoder.receptions_by(m)
        if k_now > k:
            k = k_now
            path, ok = decoder.decode(k)
            events[m] = True
            correct[m] = ok
            depth = path.depth
            in_error = not ok
            if ok or behavior is not ErrorBehavior.PREVIOUS_ESTIMATE:
                delta = residual(x0, path, cfg.L)
        x_hat = x - a**m * delta
        if not (cfg.hold_input and m > 0 and not events[m]):
            u = control_input(x_hat, cfg.K, behavior, in_error)
        xs[m], us[m], xh[m], bits[m] = x, u, x_hat, depth
        if m == cfg.horizon:
            break
        x = a * x + b * u
        if not abs(x) <= cfg.divergence_factor * cfg.L:
            diverged = True
            last = m
            break

    keep = slice(0, last + 1)
    if diverged:
        # record the step at which the guard tripped so the blow-up is visible
        xs[last + 1] = x
        us[last + 1] = 0.0
        xh[last + 1] = x - a ** (last + 1) * delta
        bits[last + 1] = depth
        keep = slice(0, last + 2)
    success = not diverged and abs(xs[cfg.success_step]) <= cfg.success_threshold
    return SimTrace(np.arange(n)[keep], xs[keep], us[keep], xh[keep], events[keep],
                    correct[keep], bits[keep], x0, bool(success), diverged,
                    np.asarray(decoder.steps))
