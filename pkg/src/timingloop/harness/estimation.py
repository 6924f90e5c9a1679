"""Open-loop estimation of ``X(t) = e^{a t} X(0)`` through the timing channel.

Each trial sends ``X(0)`` once over an exponential-delay channel with a
nested codebook and decodes at ``t_n = gamma n E(D)`` from the symbols that
have arrived by then (at most ``n``). The estimation error is
``e^{a t_n} |X(0) - X0_hat|``. Below capacity the chance of an error above
``eps`` should fall with ``n``; above capacity it should not.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..capacity import DiscretizedDist, mutual_information
from ..channel import DelayModel, transmit
from ..codec import DecodeSchedule, ResourceError, build_codebook, decode_path, encode
from ..plant import draw_initial_state
from ..quantizer import quantize, residual
from ..rng import substream
from .config import ExperimentConfig

ESTIMATION_COLUMNS = ("rate_nats", "n", "n_prime", "t_n", "epsilon", "trials", "exceed",
                      "p_exceed", "deadline_misses", "decode_errors", "mi_plugin", "mi_se",
                      "mi_bound")
ESTIMATION_SCHEMA = "timingloop.estimation/v1"

_ESTIMATION_STREAM = 5

# Plug-in MI over 2^b x 2^b cells. Full-depth cells outnumber any feasible
# trial count and the plug-in estimate then just reports log(trials); coarse
# cells are functions of both paths, so the chain bound still applies.
MI_RESOLUTION_BITS = 3


@lru_cache(maxsize=8)
def per_symbol_information(mean_s: float, step_fraction: float = 0.02,
                           truncation_multiple: float = 30.0) -> float:
    """``I(W; W+S)`` for the capacity-achieving mixture, on a fine lattice (about 1 nat)."""
    step = step_fraction * mean_s
    trunc = truncation_multiple * mean_s
    return mutual_information(DiscretizedDist.timing_mixture(mean_s, step, trunc),
                              DiscretizedDist.exponential(mean_s, step, trunc))


def plugin_mutual_information(xs, ys) -> tuple[float, float]:
    """Plug-in ``I(X;Y)`` in nats from paired samples, with a delta-method standard error."""
    n = len(xs)
    if n == 0 or n != len(ys):
        raise ValueError("need equally many samples of both variables")
    joint = Counter(zip(xs, ys))
    px, py = Counter(xs), Counter(ys)
    terms = np.array([math.log(joint[(x, y)] * n / (px[x] * py[y])) for x, y in zip(xs, ys)])
    mi = float(terms.mean())
    se = float(terms.std() / math.sqrt(n))
    return mi, se


def _coarse(path) -> tuple[int, int]:
    head = path.bits[:MI_RESOLUTION_BITS]
    return len(head), int("".join(map(str, head)) or "0", 2)


@dataclass(frozen=True)
class EstimationRow:
    rate_nats: float
    n: int
    n_prime: int
    t_n: float
    epsilon: float
    trials: int
    exceed: int
    deadline_misses: int
    decode_errors: int
    mi_plugin: float
    mi_se: float
    mi_bound: float

    @property
    def p_exceed(self) -> float:
        return self.exceed / self.trials

    def values(self):
        return (self.rate_nats, self.n, self.n_prime, self.t_n, self.epsilon, self.trials,
                self.exceed, self.p_exceed, self.deadline_misses, self.decode_errors,
                self.mi_plugin, self.mi_se, self.mi_bound)


@dataclass
class EstimationResult:
    rows: list = field(default_factory=list)

    def p_exceed(self, epsilon: float) -> list[tuple[int, float]]:
        return [(r.n, r.p_exceed) for r in self.rows if r.epsilon == epsilon]

    def data_processing_violations(self, slack_se: float = 3.0) -> list:
        return [r for r in self.rows if r.mi_plugin > r.mi_bound + slack_se * r.mi_se]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {ESTIMATION_SCHEMA}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ESTIMATION_COLUMNS)
            for row in self.rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row.values()])


def _run_trial(args):
    """Per-``n`` outcomes of one trial: (error, deadline missed, wrong decode, cells)."""
    cfg, trial = args
    grid = sorted(set(int(n) for n in cfg.n_grid))
    model = DelayModel.exponential(cfg.mean_s)
    schedule = DecodeSchedule(cfg.rate_nats, math.e * cfg.mean_s)
    depth_max = schedule.bits_at(grid[-1])
    rng = substream(cfg.seed, _ESTIMATION_STREAM, trial)
    x0 = draw_initial_state(cfg.L, rng)
    book = build_codebook(grid[-1], depth_max, cfg.mean_s, int(rng.integers(2**31)),
                          rate_nats=cfg.rate_nats, max_bits=cfg.max_bits, redraws=0)
    trace = transmit(encode(x0, cfg.L, schedule, book), model, rng)
    out = []
    for n in grid:
        t_n = cfg.gamma * n * schedule.mean_d
        kappa = min(n, trace.received_by(t_n))
        path = decode_path(book, trace.inter_reception[:kappa], model)
        truth = quantize(x0, cfg.L, schedule.bits_at(n))
        error = math.exp(cfg.a * t_n) * abs(residual(x0, path, cfg.L))
        out.append((error, kappa < n, not path.is_prefix_of(truth), _coarse(truth), _coarse(path)))
    return out


def estimation_experiment(config: ExperimentConfig) -> EstimationResult:
    """Empirical ``P(|X(t_n) - X_hat(t_n)| > eps)`` for every ``n`` in ``config.n_grid``.

    Uses ``config.a`` (per unit time), ``mean_s``, ``rate_nats``, ``gamma``,
    ``L``, ``trials``, ``epsilons``, ``max_bits`` and ``workers``. Every trial
    draws a fresh nested codebook sized for the largest ``n`` from its own
    substream. The mutual-information columns compare the plug-in estimate
    between the quantized ``X(0)`` and the decoded path, both cut to
    ``MI_RESOLUTION_BITS`` leading bits, with the chain bound ``n I(W; W+S)``.
    """
    cfg = config
    if cfg.a < 0:
        raise ValueError("a must be nonnegative")
    grid = sorted(set(int(n) for n in cfg.n_grid))
    schedule = DecodeSchedule(cfg.rate_nats, math.e * cfg.mean_s)
    depth_max = schedule.bits_at(grid[-1])
    if depth_max > cfg.max_bits:
        raise ResourceError(
            f"n={grid[-1]} at rate {cfg.rate_nats} needs {depth_max} bits, above "
            f"max_bits={cfg.max_bits}; the largest n allowed is {schedule.max_symbols(cfg.max_bits)}")

    jobs = [(cfg, trial) for trial in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(_run_trial, jobs, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        outcomes = [_run_trial(j) for j in jobs]

    per_symbol = per_symbol_information(cfg.mean_s)
    rows = []
    for i, n in enumerate(grid):
        column = [trial[i] for trial in outcomes]
        errors = np.array([c[0] for c in column])
        misses = sum(c[1] for c in column)
        wrong = sum(c[2] for c in column)
        mi, se = plugin_mutual_information([c[3] for c in column], [c[4] for c in column])
        for eps in cfg.epsilons:
            rows.append(EstimationRow(cfg.rate_nats, n, schedule.bits_at(n),
                                      cfg.gamma * n * schedule.mean_d, float(eps), cfg.trials,
                                      int(np.sum(errors > eps)), misses, wrong, mi, se,
                                      n * per_symbol))
    return EstimationResult(rows)
