"""The telephone signaling channel.

The sender waits ``W_i`` after the acknowledgment of symbol ``i-1`` and then
transmits; the symbol arrives after an i.i.d. service delay ``S_i``. The
receiver sees only inter-reception times ``D_i = W_i + S_i``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import substream

EXPONENTIAL = "exponential"
GEOMETRIC = "geometric"
DEGENERATE = "degenerate"
_KINDS = (EXPONENTIAL, GEOMETRIC, DEGENERATE)

CHANNEL_STREAM = 1

TRACE_HEADER = ("i", "W_i", "S_i", "D_i", "T_i")


class ChannelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DelayModel:
    """Law of the service delay ``S``.

    Geometric delays live on ``{1, 2, ...}`` with success probability
    ``1 / mean``.
    """

    kind: str
    mean: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ChannelConfigError(f"unknown delay kind {self.kind!r}")
        if not math.isfinite(self.mean) or self.mean < 0:
            raise ChannelConfigError(f"mean delay must be finite and >= 0, got {self.mean}")
        if self.kind == EXPONENTIAL and self.mean <= 0:
            raise ChannelConfigError("exponential delay needs mean > 0")
        if self.kind == GEOMETRIC and self.mean < 1:
            raise ChannelConfigError("geometric delay needs mean >= 1")

    @classmethod
    def exponential(cls, mean: float) -> "DelayModel":
        return cls(EXPONENTIAL, float(mean))

    @classmethod
    def geometric(cls, mean: float) -> "DelayModel":
        return cls(GEOMETRIC, float(mean))

    @classmethod
    def degenerate(cls, value: float) -> "DelayModel":
        return cls(DEGENERATE, float(value))

    @property
    def rate(self) -> float:
        return math.inf if self.mean == 0 else 1.0 / self.mean

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 0:
            raise ValueError("n must be nonnegative")
        if self.kind == EXPONENTIAL:
            return rng.exponential(self.mean, size=n)
        if self.kind == GEOMETRIC:
            return rng.geometric(1.0 / self.mean, size=n).astype(float)
        return np.full(n, self.mean)


def sample_delays(model: DelayModel, n: int, rng: np.random.Generator) -> np.ndarray:
    return model.sample(n, rng)


def sample_mixture_waits(mean_s: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draw waiting times from the capacity-achieving law for exponential delays.

    ``P(W = 0) = 1/e`` and, given ``W > 0``, ``W`` is exponential with mean
    ``e * mean_s``. Then ``W + S`` is exponential with mean ``e * mean_s``.
    """
    if not mean_s > 0:
        raise ChannelConfigError("mixture needs mean_s > 0")
    positive = rng.random(size) >= math.exp(-1.0)
    return rng.exponential(math.e * mean_s, size=size) * positive


@dataclass(frozen=True)
class ChannelTrace:
    waiting_times: np.ndarray
    delays: np.ndarray
    inter_reception: np.ndarray
    reception_times: np.ndarray

    def __len__(self):
        return len(self.waiting_times)

    def received_by(self, t: float) -> int:
        return count_received_by(self, t)

    def rows(self):
        for i in range(len(self)):
            yield (i + 1, float(self.waiting_times[i]), float(self.delays[i]),
                   float(self.inter_reception[i]), float(self.reception_times[i]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for row in self.rows():
                writer.writerow([row[0]] + [repr(v) for v in row[1:]])

    @classmethod
    def from_csv(cls, path) -> "ChannelTrace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != TRACE_HEADER:
                raise ValueError(f"unexpected trace header {header}")
            data = np.array([[float(v) for v in row[1:]] for row in reader]).reshape(-1, 4)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def transmit(waiting_times: Sequence[float], model: DelayModel,
             rng: np.random.Generator | None = None,
             delays: Sequence[float] | None = None) -> ChannelTrace:
    """Send one symbol per waiting time; ``delays`` overrides the random draw.

    Acknowledgments are instantaneous, so the clock for ``W_{i+1}`` starts at
    the reception time ``T_i`` and symbols never queue.
    """
    w = np.asarray(waiting_times, dtype=float)
    if np.any(w < 0):
        raise ValueError("waiting times must be nonnegative")
    if delays is None:
        if rng is None:
            raise ValueError("need an rng when delays are not given")
        s = model.sample(len(w), rng)
    else:
        s = np.asarray(delays, dtype=float)
        if s.shape != w.shape:
            raise ValueError("delays and waiting times differ in length")
    d = w + s
    return ChannelTrace(w, s, d, np.cumsum(d))


def count_received_by(trace, t: float) -> int:
    """Largest ``n`` with ``T_n <= t`` (``T_0 = 0``)."""
    times = trace.reception_times if isinstance(trace, ChannelTrace) else np.asarray(trace)
    return int(np.searchsorted(times, t, side="right"))


def channel_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Delay stream for channel ``index`` of an experiment seeded with ``seed``."""
    return substream(seed, CHANNEL_STREAM, index)
