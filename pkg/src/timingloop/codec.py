"""Source-channel code for the timing channel.

The quantizer path of ``X(0)`` selects a row of a random codebook whose
entries are waiting times drawn from the capacity-achieving mixture. With a
rate of ``R`` nats per unit time and mean inter-reception time ``E(D)``, the
first ``n`` symbols carry ``n' = ceil(n R E(D) / ln 2)`` source bits.

Codebooks are nested by default: column ``i`` depends only on the first
``n'(i)`` bits of the path, so a codeword truncated to ``n`` symbols is a row
of the depth-``n'(n)`` codebook. This is what lets one infinite codeword be
sent once and decoded at any time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import LN2, capacity_exponential
from .channel import DEGENERATE, EXPONENTIAL, DelayModel, sample_mixture_waits, transmit
from .quantizer import BitPath, dequantize, quantize_index
from .rng import substream

DEFAULT_MAX_BITS = 16
DEFAULT_MAX_ENTRIES = 1 << 24

_CEIL_SLACK = 1e-9


class ResourceError(RuntimeError):
    """Codebook would exceed the configured size cap; use abstract-error mode."""


class DecodeFailure(RuntimeError):
    """No codeword is consistent with the observed inter-reception times."""


@dataclass(frozen=True)
class DecodeSchedule:
    rate_nats: float
    mean_d: float

    def __post_init__(self):
        if not (self.rate_nats > 0 and self.mean_d > 0):
            raise ValueError("rate and mean inter-reception time must be positive")

    @property
    def bits_per_symbol(self) -> float:
        return self.rate_nats * self.mean_d / LN2

    def bits_at(self, n: int) -> int:
        """Source bits decodable after ``n`` symbols."""
        if n <= 0:
            return 0
        return max(0, math.ceil(n * self.bits_per_symbol - _CEIL_SLACK))

    def symbols_for(self, n_prime: int) -> int:
        """Fewest symbols whose decode resolves ``n_prime`` bits."""
        if n_prime <= 0:
            return 0
        # ceil(n b) >= n' exactly when n b > n' - 1
        n = max(1, math.floor((n_prime - 1) / self.bits_per_symbol) + 1)
        while n > 1 and self.bits_at(n - 1) >= n_prime:
            n -= 1
        while self.bits_at(n) < n_prime:
            n += 1
        return n

    def symbols_within(self, n_prime: int) -> int:
        """Most symbols whose columns depend only on the first ``n_prime`` bits."""
        n = 0
        while self.bits_at(n + 1) <= n_prime:
            n += 1
        return n

    def pairs(self, n_max: int) -> list[tuple[int, int]]:
        return [(n, self.bits_at(n)) for n in range(1, n_max + 1)]

    def max_symbols(self, max_bits: int) -> int:
        """Longest codeword whose decode depth stays within ``max_bits``."""
        return self.symbols_within(max_bits)


@dataclass(frozen=True)
class Codebook:
    entries: np.ndarray = field(repr=False)
    mean_s: float
    rate_nats: float
    mean_d: float
    seed: int
    nested: bool = True

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def n_prime(self) -> int:
        return self.rows.bit_length() - 1

    @property
    def schedule(self) -> DecodeSchedule:
        return DecodeSchedule(self.rate_nats, self.mean_d)

    def truncate(self, n: int) -> "Codebook":
        """The ``2**n'(n)`` distinct codewords seen by a decoder holding ``n`` symbols."""
        if not 1 <= n <= self.cols:
            raise ValueError(f"cannot truncate a {self.cols}-column codebook to {n}")
        if n == self.cols:
            return self
        if not self.nested:
            raise ValueError("only nested codebooks can be truncated")
        depth = self.schedule.bits_at(n)
        stride = 1 << (self.n_prime - depth)
        return Codebook(self.entries[::stride, :n], self.mean_s, self.rate_nats,
                        self.mean_d, self.seed, True)


def _check_size(n: int, n_prime: int, max_bits: int, max_entries: int) -> None:
    if n_prime > max_bits or (n << n_prime) > max_entries:
        raise ResourceError(
            f"codebook of 2^{n_prime} x {n} exceeds the cap (max_bits={max_bits}); "
            "use abstract-error mode for larger experiments")


def _draw_entries(n: int, n_prime: int, schedule: DecodeSchedule, mean_s: float,
                  rng: np.random.Generator, nested: bool) -> np.ndarray:
    rows = 1 << n_prime
    if not nested:
        return sample_mixture_waits(mean_s, (rows, n), rng)
    entries = np.empty((rows, n))
    row_ids = np.arange(rows)
    for i in range(1, n + 1):
        depth = schedule.bits_at(i)
        table = sample_mixture_waits(mean_s, 1 << depth, rng)
        entries[:, i - 1] = table[row_ids >> (n_prime - depth)]
    return entries


def build_codebook(n: int, n_prime: int, mean_s: float, seed: int, *,
                   rate_nats: float | None = None, nested: bool = True,
                   max_bits: int = DEFAULT_MAX_BITS,
                   max_entries: int = DEFAULT_MAX_ENTRIES,
                   redraws: int = 3) -> Codebook:
    """Random ``2**n_prime x n`` codebook of mixture waiting times.

    ``rate_nats`` defaults to ``n_prime ln 2 / (n E(D))`` with
    ``E(D) = e * mean_s``; when given, the decode schedule must reach exactly
    ``n_prime`` bits at ``n`` symbols.

    The mixture has an atom at zero, so identical rows turn up with positive
    probability (all-zero rows, siblings in a nested tree). A codebook with a
    duplicate is redrawn from the next seed at most ``redraws`` times; after
    that it is kept and duplicates resolve to the lowest row index.
    """
    if n < 1 or n_prime < 1:
        raise ValueError("need n >= 1 and n_prime >= 1")
    if not mean_s > 0:
        raise ValueError("mean_s must be positive")
    _check_size(n, n_prime, max_bits, max_entries)
    mean_d = math.e * mean_s
    if rate_nats is None:
        rate_nats = n_prime * LN2 / (n * mean_d)
    schedule = DecodeSchedule(rate_nats, mean_d)
    if schedule.bits_at(n) != n_prime:
        raise ValueError(f"rate {rate_nats} resolves {schedule.bits_at(n)} bits at n={n}, not {n_prime}")
    for attempt in range(seed, seed + redraws + 1):
        entries = _draw_entries(n, n_prime, schedule, mean_s, substream(attempt, 2), nested)
        if attempt == seed + redraws or not has_duplicate_rows(entries):
            break
    return Codebook(entries, mean_s, rate_nats, mean_d, attempt, nested)


def has_duplicate_rows(entries: np.ndarray) -> bool:
    return np.unique(entries, axis=0).shape[0] < entries.shape[0]


def encode(x0: float, L: float, schedule: DecodeSchedule, codebook: Codebook) -> np.ndarray:
    """Waiting times of the codeword for ``x0``: the row at its quantizer path."""
    if schedule.bits_at(codebook.cols) != codebook.n_prime:
        raise ValueError("schedule does not match the codebook")
    row = quantize_index(x0, L, codebook.n_prime)
    return codebook.entries[row].copy()


def _check_decodable(model: DelayModel) -> None:
    if model.kind == EXPONENTIAL or (model.kind == DEGENERATE and model.mean == 0):
        return
    raise ValueError("maximum-likelihood decoding is implemented for exponential delays only")


def ml_decode(codebook: Codebook, inter_reception, model: DelayModel) -> int:
    """Most likely row given ``D_1..D_n``.

    With exponential delays the likelihood of row ``m`` is
    ``lambda^n exp(-lambda sum_i (D_i - w_im))`` when ``w_im <= D_i`` for all
    ``i`` and zero otherwise, so the feasible row with the largest total
    waiting time wins. Ties go to the lowest row index.
    """
    _check_decodable(model)
    d = np.asarray(inter_reception, dtype=float)
    if d.shape != (codebook.cols,):
        raise ValueError(f"expected {codebook.cols} inter-reception times, got {d.shape}")
    feasible = np.all(codebook.entries <= d, axis=1)
    if not feasible.any():
        raise DecodeFailure("no feasible codeword")
    totals = np.where(feasible, codebook.entries.sum(axis=1), -np.inf)
    return int(np.argmax(totals))


def decode_path(codebook: Codebook, inter_reception, model: DelayModel) -> BitPath:
    """Anytime decode of the quantizer path from however many symbols arrived."""
    n = len(inter_reception)
    if n == 0:
        return BitPath()
    book = codebook.truncate(n)
    row = ml_decode(book, inter_reception, model)
    return BitPath.from_int(row, codebook.schedule.bits_at(n))


def decode_initial_state(codebook: Codebook, inter_reception, model: DelayModel,
                         L: float, schedule: DecodeSchedule | None = None) -> float:
    if schedule is not None and schedule != codebook.schedule:
        raise ValueError("schedule does not match the codebook")
    return dequantize(decode_path(codebook, inter_reception, model), L)


# --- error-rate measurement -------------------------------------------------

@dataclass(frozen=True)
class ErrorRate:
    n: int
    n_prime: int
    rate_nats: float
    capacity_nats: float
    trials: int
    errors: int

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def std_error(self) -> float:
        p = self.error_rate
        return math.sqrt(p * (1 - p) / self.trials)


def _trial(n, n_prime, mean_s, model, seed, index, codebook, nested, max_bits) -> bool:
    rng = substream(seed, 3, index)
    if codebook is None:
        codebook = build_codebook(n, n_prime, mean_s, int(rng.integers(2**31)),
                                  nested=nested, max_bits=max_bits, redraws=0)
    sent = int(rng.integers(codebook.rows))
    trace = transmit(codebook.entries[sent], model, rng)
    return ml_decode(codebook, trace.inter_reception, model) != sent


def count_decode_errors(n: int, n_prime: int, mean_s: float, trials: int, seed: int, *,
                        delay: DelayModel | None = None, fixed_codebook: bool = False,
                        nested: bool = False, max_bits: int = DEFAULT_MAX_BITS) -> ErrorRate:
    """Monte Carlo decode errors for uniformly chosen messages.

    Each trial draws its own codebook (the random-coding average) unless
    ``fixed_codebook`` is set. Codebooks are flat i.i.d. here; ``nested``
    switches to the anytime construction.
    """
    model = delay if delay is not None else DelayModel.exponential(mean_s)
    _check_decodable(model)
    _check_size(n, n_prime, max_bits, DEFAULT_MAX_ENTRIES)
    shared = (build_codebook(n, n_prime, mean_s, seed, nested=nested, max_bits=max_bits,
                             redraws=0)
              if fixed_codebook else None)
    errors = sum(_trial(n, n_prime, mean_s, model, seed, k, shared, nested, max_bits)
                 for k in range(trials))
    rate = n_prime * LN2 / (n * math.e * mean_s)
    return ErrorRate(n, n_prime, rate, capacity_exponential(mean_s), trials, errors)


def measure_error_rate(n: int, n_prime: int, mean_s: float, trials: int, seed: int,
                       **kwargs) -> float:
    return count_decode_errors(n, n_prime, mean_s, trials, seed, **kwargs).error_rate

