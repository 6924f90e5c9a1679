"""Timing capacity of the telephone signaling channel.

Closed form for exponential delays, a numeric evaluation of

    C = sup_{chi > 0} sup_{W >= 0, E W <= chi} I(W; W + S) / (E S + chi)

on a lattice, and the rate conditions of the data-rate theorems as predicates.
All information quantities are in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DiscretizedDist:
    """Finite distribution on an ascending grid of nonnegative reals."""

    support: np.ndarray
    probs: np.ndarray
    mean: float = field(init=False)

    def __post_init__(self):
        support = np.atleast_1d(np.asarray(self.support, dtype=float))
        probs = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if support.size == 0:
            raise ValueError("empty support")
        if support.shape != probs.shape:
            raise ValueError("support and probs differ in shape")
        if np.any(np.diff(support) <= 0):
            raise ValueError("support must be strictly ascending")
        if np.any(support < 0) or np.any(probs < 0):
            raise ValueError("support and probs must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        probs = probs / total
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "mean", float(support @ probs))

    @classmethod
    def point_mass(cls, value: float = 0.0) -> "DiscretizedDist":
        return cls(np.array([value]), np.array([1.0]))

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "DiscretizedDist":
        values = np.sort(np.asarray(values, dtype=float))
        return cls(values, np.full(values.size, 1.0 / values.size))

    @classmethod
    def from_weights(cls, support, weights) -> "DiscretizedDist":
        weights = np.asarray(weights, dtype=float)
        keep = weights > 0
        support = np.asarray(support, dtype=float)[keep]
        return cls(support, weights[keep] / weights[keep].sum())

    @classmethod
    def exponential(cls, mean: float, step: float, truncation: float) -> "DiscretizedDist":
        """Exponential law binned into cells of width ``step``, one atom per cell midpoint."""
        if not (mean > 0 and step > 0 and truncation > step):
            raise ValueError("need mean > 0 and truncation > step > 0")
        k = np.arange(int(round(truncation / step)))
        weights = np.exp(-k * step / mean) * -math.expm1(-step / mean)
        return cls((k + 0.5) * step, weights / weights.sum())

    @classmethod
    def geometric(cls, mean: float, truncation: int | None = None) -> "DiscretizedDist":
        """Geometric law on ``{1, 2, ...}`` truncated where the tail drops below 1e-15."""
        if mean < 1:
            raise ValueError("geometric mean must be >= 1")
        if mean == 1:
            return cls.point_mass(1.0)
        p = 1.0 / mean
        if truncation is None:
            truncation = int(math.ceil(math.log(1e-15) / math.log1p(-p)))
        k = np.arange(1, truncation + 1)
        weights = p * (1 - p) ** (k - 1)
        return cls(k.astype(float), weights / weights.sum())

    @classmethod
    def timing_mixture(cls, mean_s: float, step: float, truncation: float) -> "DiscretizedDist":
        """Binned capacity-achieving waiting-time law for exponential delays.

        An atom of mass ``1/e`` at zero plus an exponential of mean
        ``e * mean_s`` carrying the remaining mass; cell ``k`` is centred on
        ``k * step`` so the result shares a lattice with ``exponential``
        delays shifted by half a step.
        """
        if not (mean_s > 0 and step > 0 and truncation > step):
            raise ValueError("need mean_s > 0 and truncation > step > 0")
        scale = math.e * mean_s
        k = np.arange(int(round(truncation / step)) + 1)
        edges = np.concatenate(([0.0], (k[1:] - 0.5) * step, [np.inf]))
        cdf_tail = np.exp(-edges / scale)
        weights = (1 - math.exp(-1)) * (cdf_tail[:-1] - cdf_tail[1:])
        weights[0] += math.exp(-1)
        return cls(k * step, weights / weights.sum())

    def entropy(self) -> float:
        return entropy(self.probs)


@dataclass(frozen=True)
class CapacityResult:
    capacity_nats_per_sec: float
    optimal_chi: float
    optimal_input: DiscretizedDist
    iterations: int
    converged: bool
    chi_values: tuple[float, ...] = ()
    ratios: tuple[float, ...] = ()


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def capacity_exponential(mean_s: float) -> float:
    if not mean_s > 0:
        raise ValueError("exponential delays need mean_s > 0; the zero-delay channel has infinite capacity")
    return 1.0 / (math.e * mean_s)


def output_distribution(input: DiscretizedDist, delay: DiscretizedDist) -> DiscretizedDist:
    """Law of ``W + S`` on the merged grid of pairwise sums."""
    sums = np.add.outer(input.support, delay.support).ravel()
    probs = np.multiply.outer(input.probs, delay.probs).ravel()
    # collapse sums that differ only by rounding
    grid, inverse = np.unique(np.round(sums, 10), return_inverse=True)
    return DiscretizedDist(grid, np.bincount(inverse, weights=probs, minlength=grid.size))


def mutual_information(input: DiscretizedDist, delay: DiscretizedDist) -> float:
    """``I(W; W+S) = H(W+S) - H(S)`` for independent ``W`` and ``S``."""
    out = output_distribution(input, delay)
    return max(out.entropy() - delay.entropy(), 0.0)


# --- numeric capacity -------------------------------------------------------

def _on_lattice(delay: DiscretizedDist, step: float):
    """Dense probability vector of ``delay`` on ``offset + k * step``."""
    offset = delay.support[0]
    pos = (delay.support - offset) / step
    idx = np.rint(pos)
    if np.max(np.abs(pos - idx)) > 1e-6:
        raise ValueError(f"delay support is not on a lattice of step {step}")
    dense = np.zeros(int(idx[-1]) + 1)
    dense[idx.astype(int)] = delay.probs
    return offset, dense


class _CostedIteration:
    """Alternating maximization of ``I(W; W+S) - s E(W)`` over a lattice input.

    For a fixed multiplier ``s`` the objective never decreases between
    iterations; ``max_j g_j - objective`` bounds the distance to the optimum
    and serves as the stopping rule.
    """

    def __init__(self, p_delay: np.ndarray, w: np.ndarray, tol: float, max_iter: int):
        self.p_delay = p_delay
        self.h_delay = entropy(p_delay)
        self.w = w
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0
        self.converged = True

    def divergences(self, p: np.ndarray) -> np.ndarray:
        # D(P(.|w_j) || P_D) for every lattice input w_j
        q = np.convolve(p, self.p_delay)
        log_q = np.log(np.maximum(q, 1e-300))
        return -self.h_delay - np.correlate(log_q, self.p_delay, mode="valid")

    def information(self, p: np.ndarray) -> float:
        return float(p @ self.divergences(p))

    def run(self, s: float, p: np.ndarray, history: list | None = None,
            tol: float | None = None) -> np.ndarray:
        tol = self.tol if tol is None else max(tol, self.tol)
        previous = -np.inf
        if history is not None:
            history.append([])
        for _ in range(self.max_iter):
            self.iterations += 1
            g = self.divergences(p) - s * self.w
            objective = float(p @ g)
            assert objective >= previous - 1e-10 * max(1.0, abs(objective)), \
                f"objective decreased from {previous} to {objective}"
            if history is not None:
                history[-1].append(objective)
            previous = objective
            if g.max() - objective < tol:
                return p
            p = p * np.exp(g - g.max())
            p /= p.sum()
        self.converged = False
        return p


def constrained_capacity(delay: DiscretizedDist, chi: float, grid_step: float = 0.05,
                         tol: float = 1e-4, max_iter: int = 20000,
                         support_multiple: float = 15.0, history: list | None = None):
    """Largest ``I(W; W+S)`` over lattice inputs with ``E(W) <= chi``.

    Returns ``(information, input_dist, iterations, converged)``. The mean
    constraint is enforced through a multiplier found by safeguarded regula
    falsi; ``history`` receives one list of per-iteration objective values
    for every multiplier tried.
    """
    if not chi > 0:
        raise ValueError("chi must be positive")
    _, p_delay = _on_lattice(delay, grid_step)
    w = np.arange(int(math.ceil(support_multiple * chi / grid_step)) + 1) * grid_step
    it = _CostedIteration(p_delay, w, tol, max_iter)
    p = np.full(w.size, 1.0 / w.size)
    mean = lambda q: float(q @ w)

    # bracketing runs stop early; only the final multiplier is run to ``tol``
    loose = max(1e-2, tol)
    scale = 1.0 / max(delay.mean, grid_step)
    s_hi = scale
    p = it.run(s_hi, p, history, loose)
    m_hi = mean(p)
    s_lo, m_lo = 0.0, None
    while m_hi > chi:
        s_lo, m_lo = s_hi, m_hi
        s_hi *= 2
        p = it.run(s_hi, p, history, loose)
        m_hi = mean(p)

    s, m = s_hi, m_hi
    side = 0
    for step in range(200):
        if abs(m - chi) <= 1e-4 * chi:
            p = it.run(s, p, history)
            m = mean(p)
            if abs(m - chi) <= 1e-4 * chi:
                break
        if m_lo is None:
            s = 0.5 * (s_lo + s_hi)
        else:
            s = s_lo + (m_lo - chi) * (s_hi - s_lo) / (m_lo - m_hi)
            if not s_lo < s < s_hi:
                s = 0.5 * (s_lo + s_hi)
        if s < 1e-9 * scale:
            # constraint inactive: the unconstrained optimum already meets it
            s = 0.0
            p = it.run(s, p, history)
            break
        # geometric tightening: a run that stops at once cannot stall the search
        p = it.run(s, p, history, loose * 0.3 ** step)
        m = mean(p)
        # Illinois modification keeps regula falsi from stalling on one side
        if m > chi:
            s_lo, m_lo = s, m
            if side == 1:
                m_hi = chi + (m_hi - chi) / 2
            side = 1
        else:
            s_hi, m_hi = s, m
            if side == -1 and m_lo is not None:
                m_lo = chi + (m_lo - chi) / 2
            side = -1
    info = it.information(p)
    return info, DiscretizedDist.from_weights(w, p), it.iterations, it.converged


def _golden_max(f, lo: float, hi: float, rel_tol: float, max_evals: int):
    inv_phi = (math.sqrt(5) - 1) / 2
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_evals):
        if hi - lo <= rel_tol * hi:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


DEFAULT_CHI_FACTORS = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0)


def capacity_numeric(delay: DiscretizedDist, chi_grid: Sequence[float] | None = None,
                     grid_step: float = 0.05, tol: float = 1e-4, max_iter: int = 20000,
                     support_multiple: float = 15.0, refine_iters: int = 25) -> CapacityResult:
    """Numeric timing capacity in nats per unit time.

    Evaluates the constrained capacity on ``chi_grid`` (default: multiples of
    ``E(S)``) and refines the best ratio by golden-section search between the
    neighbouring grid points. A run that hits ``max_iter`` is returned with
    ``converged=False``.
    """
    if delay.mean <= 0:
        raise ValueError("zero-delay channel has infinite timing capacity")
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if chi_grid is None:
        chi_grid = [f * delay.mean for f in DEFAULT_CHI_FACTORS]
    chi_grid = sorted(float(c) for c in chi_grid)
    if not chi_grid:
        raise ValueError("chi_grid is empty")

    cache = {}
    totals = {"iterations": 0, "converged": True}

    def ratio(chi: float) -> float:
        if chi not in cache:
            info, dist, iters, ok = constrained_capacity(
                delay, chi, grid_step, tol, max_iter, support_multiple)
            totals["iterations"] += iters
            totals["converged"] &= ok
            # a slightly loose mean constraint is charged at its actual value
            cache[chi] = (info / (delay.mean + max(chi, dist.mean)), dist)
        return cache[chi][0]

    values = [ratio(c) for c in chi_grid]
    best = int(np.argmax(values))
    if len(chi_grid) > 1:
        lo = chi_grid[max(best - 1, 0)]
        hi = chi_grid[min(best + 1, len(chi_grid) - 1)]
        _golden_max(ratio, lo, hi, rel_tol=1e-3, max_evals=refine_iters)
    chi_star = max(cache, key=lambda c: cache[c][0])
    chis = tuple(sorted(cache))
    return CapacityResult(
        capacity_nats_per_sec=max(cache[chi_star][0], 0.0),
        optimal_chi=chi_star,
        optimal_input=cache[chi_star][1],
        iterations=totals["iterations"],
        converged=totals["converged"],
        chi_values=chis,
        ratios=tuple(cache[c][0] for c in chis),
    )


# --- rate conditions --------------------------------------------------------

def necessary_rate_holds(a: float, gamma: float, input: DiscretizedDist,
                         delay: DiscretizedDist) -> bool:
    """``I(W; W+S) >= a * gamma * E(W + S)``: needed for the estimation error to vanish."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    return mutual_information(input, delay) >= a * gamma * (input.mean + delay.mean)


def sufficient_condition_holds(a: float, gamma: float, mean_s: float) -> bool:
    """``1 / (e E(S)) > a * gamma`` for exponential delays."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    return capacity_exponential(mean_s) > a * gamma


def rd_lower_bound(a: float, t: float, h_x0: float, eps: float, phi: float) -> float:
    """Lower bound on the rate-distortion function of ``X(t) = e^{at} X(0)``.

    Bits needed so that ``P(|X(t) - Xhat(t)| > eps) <= phi``; may be negative.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 <= phi <= 1:
        raise ValueError("phi must lie in [0, 1]")
    return (1 - phi) * (a * t + h_x0) - math.log(2 * eps) - LN2 / 2


def mi_chain_bound(kappa_n: int, input: DiscretizedDist, delay: DiscretizedDist) -> float:
    """Data-processing ceiling ``kappa_n * I(W; W+S)`` on ``I(X; Xhat)``."""
    if kappa_n < 0:
        raise ValueError("kappa_n must be nonnegative")
    if kappa_n == 0:
        return 0.0
    return kappa_n * mutual_information(input, delay)
