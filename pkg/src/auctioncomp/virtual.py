"""Myerson virtual values, regularity detection, and ironing.

The ironed virtual value is built in quantile space: with u the value
quantile, the revenue curve R(u) = (1 - u) * F^{-1}(u) is tabulated on a
grid, its least concave majorant is taken, and the (negated) left slope of
the majorant gives a monotone nondecreasing ironed virtual value per grid
cell. For distributions whose raw virtual value has a closed form (uniform,
exponential, truncated equal-revenue) evaluation dispatches to the exact
formula; the grid is still built to drive the regularity check.

Finite discrete supports include their cumulative-probability breakpoints in
the grid, so the hull construction there is exact, not approximate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import (
    Exponential,
    FiniteDiscrete,
    PointMass,
    SingleDist,
    TruncatedEqualRevenue,
    Uniform,
)
from .rng import substream

__all__ = ["IronedVirtualMap", "raw_virtual", "raw_virtual_many", "iron", "fact1_check"]

REGULARITY_TOL = 1e-9
DEFAULT_GRID = 4096


def raw_virtual(d: SingleDist, v: float) -> float:
    """Raw virtual value v - (1 - F(v)) / f(v).

    Defined where d has a density, plus the truncation atom of the
    equal-revenue curve (where it equals the truncation point). Other atoms
    are rejected.
    """
    return float(raw_virtual_many(d, np.asarray(v, dtype=float)))


def raw_virtual_many(d: SingleDist, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if isinstance(d, Uniform):
        if np.any(v < d.lo) or np.any(v > d.hi):
            raise ValueError("value outside support")
        return 2.0 * v - d.hi
    if isinstance(d, Exponential):
        if np.any(v < 0):
            raise ValueError("value outside support")
        return v - 1.0 / d.rate
    if isinstance(d, TruncatedEqualRevenue):
        if np.any(v < 1) or np.any(v > d.p):
            raise ValueError("value outside support")
        # 0 on the continuous part, p at the truncation atom.
        return np.where(v >= d.p, d.p, 0.0)
    if isinstance(d, (PointMass, FiniteDiscrete)):
        raise ValueError("raw virtual value undefined at atoms of discrete distributions")
    f = d.pdf(v)
    if np.any(f <= 0):
        raise ValueError("no density at requested value")
    return v - (1.0 - d.cdf(v)) / f


@dataclass(frozen=True)
class IronedVirtualMap:
    """Grid representation of the ironed virtual value in quantile space."""

    dist: SingleDist
    grid: np.ndarray        # ascending quantiles, grid[0]=0, grid[-1]=1
    phi_bar: np.ndarray     # one slope per grid cell, monotone nondecreasing
    regular: bool

    def at_quantile(self, u):
        """Ironed virtual value of the value at quantile u."""
        u = np.asarray(u, dtype=float)
        d = self.dist
        if self.regular and isinstance(d, (Uniform, Exponential, TruncatedEqualRevenue)):
            return raw_virtual_many(d, d.quantile(u))
        cell = np.clip(np.searchsorted(self.grid, u, side="right") - 1, 0, len(self.phi_bar) - 1)
        return self.phi_bar[cell]

    def at_value(self, v):
        return self.at_quantile(self.dist.cdf(v))


def _upper_concave_envelope(u: np.ndarray, r: np.ndarray):
    """Indices of the vertices of the least concave majorant of (u, r)."""
    hull: list[int] = []
    for i in range(len(u)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 if it lies (weakly) below chord i0 -> i
            cross = (u[i1] - u[i0]) * (r[i] - r[i0]) - (u[i] - u[i0]) * (r[i1] - r[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def iron(d: SingleDist, K: int = DEFAULT_GRID) -> IronedVirtualMap:
    """Build the ironed virtual value map on a K-cell quantile grid."""
    if K < 2:
        raise ValueError("grid size must be >= 2")
    grid = np.linspace(0.0, 1.0, K + 1)
    bps = d.quantile_breakpoints()
    if bps.size:
        grid = np.unique(np.concatenate([grid, bps[(bps > 0) & (bps < 1)]]))

    # evaluate the quantile right-continuously, so at a discrete breakpoint the
    # revenue point is the segment's upper corner (the one the hull must see)
    vals = d.quantile(np.minimum(np.nextafter(grid, 1.0), 1.0))
    with np.errstate(invalid="ignore"):
        revenue = (1.0 - grid) * vals
    revenue[-1] = 0.0 if not np.isfinite(vals[-1]) else (1.0 - grid[-1]) * vals[-1]

    hull_idx = _upper_concave_envelope(grid, revenue)
    hull_u = grid[hull_idx]
    hull_r = revenue[hull_idx]
    hull_on_grid = np.interp(grid, hull_u, hull_r)
    gap = hull_on_grid - revenue
    if d.purely_atomic:
        # between atoms the quantile is flat and the tabulated "curve" is not
        # the revenue of any price; regularity is decided at the vertices only
        vertex = np.isin(grid, np.concatenate([[0.0, 1.0], bps]))
        gap = gap[vertex]
    regular = bool(np.max(gap) <= REGULARITY_TOL)

    # one slope per hull segment, broadcast to the grid cells it spans
    seg_slopes = -np.diff(hull_r) / np.diff(hull_u)
    seg_slopes = np.maximum.accumulate(seg_slopes)  # absorb fp noise only
    cell_seg = np.searchsorted(hull_u, grid[:-1], side="right") - 1
    cell_seg = np.clip(cell_seg, 0, len(seg_slopes) - 1)
    phi_bar = seg_slopes[cell_seg]

    return IronedVirtualMap(dist=d, grid=grid, phi_bar=phi_bar, regular=regular)


def fact1_check(d: SingleDist, v: float, N: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of E[phi(w) | w >= v] with its standard error.

    For regular distributions the estimate should match v within sampling
    noise; the caller owns the 3-sigma comparison.
    """
    if v > d.support_hi:
        raise ValueError("conditioning value above the support")
    qlo = float(d.cdf_left(np.asarray(v)))
    if qlo >= 1.0:
        raise ValueError("conditioning event has probability zero")
    rng = substream(seed, "fact1")
    u = qlo + rng.random(N) * (1.0 - qlo)
    w = d.quantile(u)
    phi = raw_virtual_many(d, w)
    est = float(np.mean(phi))
    stderr = float(np.std(phi, ddof=1) / np.sqrt(N)) if N > 1 else float("inf")
    return est, stderr
