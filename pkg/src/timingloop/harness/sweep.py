"""Monte Carlo over episodes and the capacity sweep behind the phase transition."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .episode import LQR_STEPS, run_episode

SWEEP_COLUMNS = ("capacity_bits", "runs", "successes", "success_fraction", "mean_lqr_cost",
                 "finite_cost_runs")
SWEEP_SCHEMA = "timingloop.sweep/v1"


@dataclass(frozen=True)
class SweepRow:
    capacity_bits: float
    runs: int
    successes: int
    mean_lqr_cost: float
    finite_cost_runs: int

    def __post_init__(self):
        if not 0 <= self.successes <= self.runs:
            raise ValueError("successes must lie in [0, runs]")

    @property
    def success_fraction(self) -> float:
        return self.successes / self.runs

    @property
    def std_error(self) -> float:
        p = self.success_fraction
        return math.sqrt(p * (1 - p) / self.runs)

    def values(self):
        return (self.capacity_bits, self.runs, self.successes, self.success_fraction,
                self.mean_lqr_cost, self.finite_cost_runs)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([r.capacity_bits for r in self.rows])

    @property
    def fractions(self) -> np.ndarray:
        return np.array([r.success_fraction for r in self.rows])

    def monotonicity_violations(self, slack_se: float = 2.0) -> list[int]:
        """Indices where the fraction drops below its predecessor by more than the noise."""
        bad = []
        for i in range(1, len(self.rows)):
            prev, cur = self.rows[i - 1], self.rows[i]
            if cur.capacity_bits < prev.capacity_bits:
                continue
            noise = slack_se * math.hypot(prev.std_error, cur.std_error)
            if cur.success_fraction < prev.success_fraction - noise:
                bad.append(i)
        return bad

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema: {SWEEP_SCHEMA}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in self.rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row.values()])


def episode_seed(seed: int, grid_index: int, run_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(grid_index), int(run_index)])


def _episode_summary(args):
    config, seed, grid_index, run_index = args
    trace = run_episode(config, episode_seed(seed, grid_index, run_index))
    return trace.success, (math.inf if trace.diverged else trace.lqr_cost)


def _summaries(config: ExperimentConfig, grid_index: int, pool):
    jobs = [(config, config.seed, grid_index, i) for i in range(config.runs)]
    if pool is None:
        return [_episode_summary(j) for j in jobs]
    chunk = max(1, config.runs // (4 * config.workers))
    return list(pool.map(_episode_summary, jobs, chunksize=chunk))


def _aggregate(config: ExperimentConfig, summaries) -> SweepRow:
    successes = sum(1 for ok, _ in summaries if ok)
    if config.horizon < LQR_STEPS:
        return SweepRow(config.capacity_bits, config.runs, successes, math.nan, 0)
    costs = [c for _, c in summaries if math.isfinite(c)]
    # the mean is over runs that stayed finite; the count is reported alongside
    mean_cost = math.fsum(costs) / len(costs) if costs else math.inf
    return SweepRow(config.capacity_bits, config.runs, successes, mean_cost, len(costs))


def monte_carlo(config: ExperimentConfig, grid_index: int = 0, pool=None) -> SweepRow:
    """``config.runs`` episodes with substreams ``(seed, grid_index, run)``.

    Results depend only on the seeds, never on ``config.workers`` or the
    order in which episodes finish.
    """
    if pool is None and config.workers > 1:
        with ProcessPoolExecutor(config.workers) as own:
            return _aggregate(config, _summaries(config, grid_index, own))
    return _aggregate(config, _summaries(config, grid_index, pool))


def sweep_capacity(config: ExperimentConfig, capacity_grid: Sequence[float]) -> SweepResult:
    """One Monte Carlo row per capacity, each grid point on its own substreams."""
    grid = list(capacity_grid)
    if not grid:
        raise ValueError("capacity grid is empty")
    configs = [config.replace(capacity_bits=float(c)) for c in grid]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            rows = [monte_carlo(c, i, pool) for i, c in enumerate(configs)]
    else:
        rows = [monte_carlo(c, i) for i, c in enumerate(configs)]
    return SweepResult(rows)


def default_capacity_grid(a: float, points: int = 13) -> np.ndarray:
    """Capacities from 0.5 to 2 times ``log2 a``."""
    if not a > 1:
        raise ValueError(f"the default grid needs an unstable plant (a > 1), got a={a}; pass a grid")
    return np.linspace(0.5, 2.0, points) * math.log2(a)
