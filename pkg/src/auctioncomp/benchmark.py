"""The quantile-region revenue benchmark and its chain of upper bounds.

The benchmark partitions bidders by their highest-quantile item: bidder i is
"in region j" when her quantile for item j beats her quantile for every other
item. The benchmark value is

    sum_j E[ max_i { phi_bar_j(v_ij)^+ * I(i in R_j) + v_ij * I(i not in R_j) } ],

which upper-bounds the optimal revenue of any mechanism. The chain bounds
relax it step by step toward a sum of single-item ironed virtual values at
coupled quantile experiments; each relaxation drops the positive part exactly
where the underlying inequality does.

All estimators draw complete valuation profiles from one shared per-seed
stream, so estimates compared at the same seed use common random numbers.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import ProductDist
from .experiments import sample_xb, sample_xl
from .revenue import RevenueEstimate, _mc_estimate
from .rng import batch_sizes, substream
from .virtual import iron

__all__ = [
    "assign_regions",
    "efftw_bound",
    "obs1_bound",
    "xl_chain_bound",
    "xb_chain_bound",
]

_BATCH = 1_000_000


def assign_regions(quantiles: np.ndarray) -> np.ndarray:
    """Per-bidder region: the index of the item with the highest quantile.

    Accepts quantile arrays of shape (..., n, m); returns shape (..., n).
    Atom quantiles are randomized at sampling time, so ties have measure zero.
    """
    quantiles = np.asarray(quantiles)
    if quantiles.shape[-1] < 1:
        raise ValueError("need at least one item")
    return np.argmax(quantiles, axis=-1)


def _profile_batches(pd: ProductDist, n: int, N: int, seed: int):
    """Yield coupled (values, quantiles) profile batches from the shared stream."""
    per_batch = max(1, _BATCH // max(1, n * pd.m))
    for bi, b in enumerate(batch_sizes(N, per_batch)):
        rng = substream(seed, "profiles", bi)
        yield pd.sample_profiles(rng, n, b)


def efftw_bound(pd: ProductDist, n: int, N: int, seed: int) -> RevenueEstimate:
    """Monte Carlo estimate of the quantile-region revenue benchmark."""
    if n < 1:
        raise ValueError("need n >= 1")
    imaps = [iron(d) for d in pd.marginals]
    totals = []
    for values, quantiles in _profile_batches(pd, n, N, seed):
        region = assign_regions(quantiles)
        batch_total = np.zeros(values.shape[0])
        for j, imap in enumerate(imaps):
            in_region = region == j
            phi_plus = np.maximum(imap.at_quantile(quantiles[:, :, j]), 0.0)
            score = np.where(in_region, phi_plus, values[:, :, j])
            batch_total += score.max(axis=1)
        totals.append(batch_total)
    return _mc_estimate(np.concatenate(totals), N, seed)


def obs1_bound(pd: ProductDist, n: int, N: int, seed: int) -> RevenueEstimate:
    """First relaxation of the benchmark, per item j:

    E[ max { v_(1)j * I(top bidder not in R_j), phi_bar_j(v_(1)j), v_(2)j } ]

    where v_(1)j, v_(2)j are the two highest values for item j. Weakly exceeds
    the benchmark.
    """
    if n < 2:
        raise ValueError("need n >= 2 (uses the second-highest value)")
    imaps = [iron(d) for d in pd.marginals]
    totals = []
    for values, quantiles in _profile_batches(pd, n, N, seed):
        region = assign_regions(quantiles)
        b = values.shape[0]
        rows = np.arange(b)
        batch_total = np.zeros(b)
        for j, imap in enumerate(imaps):
            vj = values[:, :, j]
            i1 = np.argmax(vj, axis=1)
            v1 = vj[rows, i1]
            v2 = np.partition(vj, n - 2, axis=1)[:, n - 2]
            off_region = region[rows, i1] != j
            phi1 = imap.at_quantile(quantiles[rows, i1, j])
            batch_total += np.maximum(np.maximum(np.where(off_region, v1, 0.0), phi1), v2)
        totals.append(batch_total)
    return _mc_estimate(np.concatenate(totals), N, seed)


def _phi_at_experiment(pd: ProductDist, sampler, N: int, seed: int, label: str):
    """Sum over items of E[phi_bar_j at an experiment quantile]; no positive part."""
    total = 0.0
    var = 0.0
    for j, d in enumerate(pd.marginals):
        imap = iron(d)
        chunks = []
        for bi, b in enumerate(batch_sizes(N, _BATCH)):
            rng = substream(seed, label, j, bi)
            chunks.append(imap.at_quantile(sampler(rng, b)))
        est = _mc_estimate(np.concatenate(chunks), N, seed)
        total += est.mean
        var += est.stderr**2
    return RevenueEstimate(mean=total, stderr=math.sqrt(var), samples=N, seed=seed)


def xl_chain_bound(pd: ProductDist, n: int, N: int, seed: int) -> RevenueEstimate:
    """Sum over items of E[phi_bar_j at the little-n experiment quantile X_L(n, m)]."""
    if n < 2:
        raise ValueError("need n >= 2")
    m = pd.m
    return _phi_at_experiment(pd, lambda rng, b: sample_xl(n, m, rng, b), N, seed, "xl-chain")


def xb_chain_bound(pd: ProductDist, n: int, ell: int, N: int, seed: int) -> RevenueEstimate:
    """Sum over items of E[phi_bar_j at X_B(n', ell)] with n' = n + (m-1)(ell-1)."""
    if not 2 <= ell <= n:
        raise ValueError("need 2 <= ell <= n")
    n_prime = n + (pd.m - 1) * (ell - 1)
    return _phi_at_experiment(pd, lambda rng, b: sample_xb(n_prime, ell, rng, b), N, seed, "xb-chain")
