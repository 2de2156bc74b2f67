"""Quantile-space random variables and empirical stochastic dominance.

The samplers here realize the coupling experiments that reduce the
competition-complexity analysis to comparing random variables on [0, 1]:

* ``X_S(n, c)``: the maximum of n + c i.i.d. uniforms (selling with c extra
  bidders).
* ``X_B(n, l)``: max of the top uniform and a fresh uniform draw from
  [X_(l), 1] (the big-n benchmark experiment).
* ``X_L(n, m)``: the little-n benchmark experiment, where a uniformly random
  one of the "item" draws exceeding the top "bidder" draw (if any) is taken,
  maxed with a fresh draw from [X_(2), 1].

Order statistics of uniforms are generated top-down via the ratio recursion
X_(k+1) = X_(k) * U^(1/(n-k)), so only the needed top-k values are drawn.

Dominance between two samplers is decided empirically on a uniform probe
grid with a two-sided DKW allowance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rng import batch_sizes, substream

__all__ = [
    "ExperimentParams",
    "DominanceReport",
    "sample_xs",
    "sample_w",
    "sample_xb",
    "sample_xl",
    "sample_xl_prime",
    "ystar_tail",
    "ystar_conditional_mc",
    "dominance_test",
    "prop_key_conditional",
    "dkw_epsilon",
]

DEFAULT_GRID_SIZE = 199
_BATCH = 1_000_000


@dataclass(frozen=True)
class ExperimentParams:
    """Parameters of the quantile experiments."""

    n: int
    m: int = 1
    c: int = 0
    ell: int = 2

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.c < 0:
            raise ValueError("need n >= 1, m >= 1, c >= 0")
        if not 2 <= self.ell <= max(self.n, 2):
            raise ValueError("order index ell must lie in [2, n]")


def top_order_stats(n: int, k: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Top-k order statistics of n i.i.d. uniforms, shape (size, k), descending."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    out = np.empty((size, k))
    out[:, 0] = rng.random(size) ** (1.0 / n)
    for j in range(1, k):
        out[:, j] = out[:, j - 1] * rng.random(size) ** (1.0 / (n - j))
    return out


def sample_xs(n: int, c: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Max of n + c i.i.d. uniforms."""
    if n + c < 1:
        raise ValueError("need n + c >= 1")
    return rng.random(size) ** (1.0 / (n + c))


def sample_w(n: int, ell: int, rng: np.random.Generator, size: int):
    """Draw (W_{ell,n}, X_(1), X_(ell)); W is uniform on [X_(ell), 1]."""
    if not 1 <= ell <= n:
        raise ValueError("need 1 <= ell <= n")
    tops = top_order_stats(n, ell, rng, size)
    x1 = tops[:, 0]
    xl = tops[:, ell - 1]
    w = xl + rng.random(size) * (1.0 - xl)
    return w, x1, xl


def sample_xb(n: int, ell: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """X_B(n, ell) = max(X_(1), W_{ell,n})."""
    if not 2 <= ell <= n:
        raise ValueError("need 2 <= ell <= n")
    w, x1, _ = sample_w(n, ell, rng, size)
    return np.maximum(x1, w)


def _pick_exceeder(y: np.ndarray, x1: np.ndarray, rng: np.random.Generator):
    """Uniformly random element of {y_j : y_j > x1} per row.

    Returns (chosen, any_exceed); ``chosen`` is undefined where none exceed.
    In descending sorted order the exceeders occupy the first k slots, so a
    uniform index into the first k is a uniform pick among exceeders.
    """
    k = np.count_nonzero(y > x1[:, None], axis=1)
    y_sorted = -np.sort(-y, axis=1)
    idx = np.minimum((rng.random(len(x1)) * np.maximum(k, 1)).astype(np.int64), y.shape[1] - 1)
    chosen = y_sorted[np.arange(len(x1)), idx]
    return chosen, k > 0


def sample_xl_prime(n: int, m: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """X'_L(n, m): X_(1) if no item draw exceeds it, else a random exceeder."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1, m >= 1")
    x1 = top_order_stats(n, 1, rng, size)[:, 0]
    if m == 1:
        return x1
    y = rng.random((size, m - 1))
    chosen, has = _pick_exceeder(y, x1, rng)
    return np.where(has, chosen, x1)


def sample_xl(n: int, m: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """The little-n benchmark experiment.

    For n >= 2 the output is maxed with W_{2,n}. For n = 1 there is no second
    order statistic and the single-bidder variant (no W draw) is used.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1, m >= 1")
    if n == 1:
        return sample_xl_prime(1, m, rng, size)
    tops = top_order_stats(n, 2, rng, size)
    x1 = tops[:, 0]
    w2 = tops[:, 1] + rng.random(size) * (1.0 - tops[:, 1])
    if m == 1:
        return np.maximum(x1, w2)
    y = rng.random((size, m - 1))
    chosen, has = _pick_exceeder(y, x1, rng)
    return np.maximum(np.where(has, chosen, x1), w2)


def ystar_tail(n: int, m: int, p) -> np.ndarray | float:
    """Closed-form Pr[Y* > p | X_(1),n < p].

    Y* is 0 when no item draw exceeds X_(1), and otherwise a uniformly random
    exceeding item draw. Equals
    1 - n p^(m-1)/(n+m-2) - sum_{i=1}^{m-2} n p^i / ((n+i)(n+i-1)).
    """
    if m < 2:
        raise ValueError("need m >= 2")
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ValueError("p must lie in [0, 1]")
    out = 1.0 - n * p ** (m - 1) / (n + m - 2)
    for i in range(1, m - 1):
        out = out - n * p**i / ((n + i) * (n + i - 1))
    return out if out.ndim else float(out)


def ystar_conditional_mc(n: int, m: int, p: float, N: int, seed: int) -> tuple[float, float]:
    """Monte Carlo Pr[Y* > p | X_(1),n < p] by direct conditional sampling.

    Conditioned on X_(1),n < p the bidder draws are i.i.d. uniform on [0, p],
    so the conditional law is sampled exactly (no rejection).
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if m < 2:
        raise ValueError("need m >= 2")
    hits = 0
    for bi, b in enumerate(batch_sizes(N, _BATCH)):
        rng = substream(seed, "ystar-mc", bi)
        x1 = p * rng.random(b) ** (1.0 / n)
        y = rng.random((b, m - 1))
        chosen, has = _pick_exceeder(y, x1, rng)
        hits += int(np.count_nonzero(has & (chosen > p)))
    est = hits / N
    stderr = math.sqrt(max(est * (1 - est), 1e-300) / N)
    return est, stderr


def dkw_epsilon(N: int, delta: float) -> float:
    """Half-width of the DKW uniform confidence band for an empirical CDF."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * N))


@dataclass(frozen=True)
class DominanceReport:
    """Paired empirical CDFs on a probe grid with a DKW budget and a verdict.

    ``dominates`` is true iff cdf_a(p) <= cdf_b(p) + 2 * epsilon at every
    probe point, i.e. A first-order stochastically dominates B up to the
    two-sided sampling allowance.
    """

    grid: np.ndarray
    cdf_a: np.ndarray
    cdf_b: np.ndarray
    epsilon: float
    dominates: bool

    @property
    def max_violation(self) -> float:
        return float(np.max(self.cdf_a - self.cdf_b))


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def dominance_test(
    sampler_a: Sampler,
    sampler_b: Sampler,
    N: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    delta: float = 1e-3,
    seed: int = 0,
) -> DominanceReport:
    """Empirical first-order stochastic dominance of A over B.

    Samples are sharded over fixed-size batches with per-batch substreams, so
    the merged counts do not depend on how batches are scheduled.
    """
    if N < 10_000:
        raise ValueError("need N >= 10^4 for a meaningful DKW band")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    grid = np.arange(1, grid_size + 1) / (grid_size + 1)
    counts_a = np.zeros(grid_size, dtype=np.int64)
    counts_b = np.zeros(grid_size, dtype=np.int64)
    for bi, b in enumerate(batch_sizes(N, _BATCH)):
        xa = sampler_a(substream(seed, "dom-a", bi), b)
        xb = sampler_b(substream(seed, "dom-b", bi), b)
        counts_a += np.searchsorted(np.sort(xa), grid, side="right")
        counts_b += np.searchsorted(np.sort(xb), grid, side="right")
    cdf_a = counts_a / N
    cdf_b = counts_b / N
    eps = dkw_epsilon(N, delta)
    dominates = bool(np.all(cdf_a <= cdf_b + 2 * eps))
    return DominanceReport(grid=grid, cdf_a=cdf_a, cdf_b=cdf_b, epsilon=eps, dominates=dominates)


def prop_key_conditional(n: int, ell: int, c: int, p: float, N: int, seed: int):
    """Compare Pr[Z_(1),c > p | X_(1),n < p] with Pr[W_{ell,n} > p | X_(1),n < p].

    The left side is analytic (1 - p^c, independence). The right side is
    estimated by sampling the conditional law directly: given X_(1),n < p the
    draws are i.i.d. uniform on [0, p]. Returns (lhs, rhs, (0, stderr_rhs)).
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if p**n < 1e-4:
        raise ValueError("conditioning event too rare (p^n < 1e-4)")
    if not 2 <= ell <= n:
        raise ValueError("need 2 <= ell <= n")
    lhs = 1.0 - p**c
    hits = 0
    for bi, b in enumerate(batch_sizes(N, _BATCH)):
        rng = substream(seed, "prop-key", bi)
        tops = p * top_order_stats(n, ell, rng, b)
        xl = tops[:, ell - 1]
        w = xl + rng.random(b) * (1.0 - xl)
        hits += int(np.count_nonzero(w > p))
    rhs = hits / N
    stderr = math.sqrt(max(rhs * (1 - rhs), 1e-300) / N)
    return lhs, rhs, (0.0, stderr)
