"""Single-variate value distributions and value/quantile coupling.

Each distribution exposes an exact CDF, the generalized inverse CDF
(``quantile``), a density where one exists, and seeded coupled sampling that
returns both a value and the uniform quantile that produced it. At point
masses the stored quantile is the raw uniform draw, which always lies in
``[Pr[X < x], Pr[X <= x]]``; over repeated draws it is uniform on [0, 1].

Supported kinds: uniform, exponential, equal-revenue truncated at p (CDF
1 - 1/x on [1, p) with an atom of mass 1/p at p), point mass, and finite
discrete. Instances are immutable and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SingleDist",
    "Uniform",
    "Exponential",
    "TruncatedEqualRevenue",
    "PointMass",
    "FiniteDiscrete",
    "ProductDist",
    "QuantileDraw",
    "parse_dist",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class QuantileDraw:
    """A coupled (value, quantile) pair from a single distribution."""

    value: float
    quantile: float


class SingleDist:
    """Base class for one-dimensional value distributions."""

    support_lo: float
    support_hi: float

    def cdf(self, x):
        """Pr[X <= x]; clamps to 0/1 outside the support."""
        raise NotImplementedError

    def cdf_left(self, x):
        """Pr[X < x]; differs from cdf only at atoms."""
        return self.cdf(x)

    def quantile(self, q):
        """Generalized inverse: inf{x : cdf(x) >= q}. Requires q in [0, 1]."""
        q = np.asarray(q, dtype=float)
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("quantile argument must lie in [0, 1]")
        return self._quantile(q)

    def _quantile(self, q):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    @property
    def is_continuous(self) -> bool:
        return False

    @property
    def purely_atomic(self) -> bool:
        """True when all mass sits on atoms (quantile is a step function)."""
        return False

    def quantile_breakpoints(self):
        """Quantile-space knots (atoms, kinks) the ironing grid must include."""
        return np.array([])

    def sample_coupled(self, rng: np.random.Generator) -> QuantileDraw:
        q = float(rng.random())
        return QuantileDraw(value=float(self._quantile(np.asarray(q))), quantile=q)

    def sample_coupled_many(self, rng: np.random.Generator, size: int):
        """Vectorized coupled sampling; returns (values, quantiles)."""
        q = rng.random(size)
        return self._quantile(q), q

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):  # pragma: no cover
        return self.spec()


@dataclass(frozen=True)
class Uniform(SingleDist):
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("uniform needs hi > lo")
        object.__setattr__(self, "support_lo", self.lo)
        object.__setattr__(self, "support_hi", self.hi)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def _quantile(self, q):
        return self.lo + q * (self.hi - self.lo)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    @property
    def is_continuous(self):
        return True

    def spec(self):
        return f"uniform:{_fmt(self.lo)},{_fmt(self.hi)}"


@dataclass(frozen=True)
class Exponential(SingleDist):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("exponential rate must be positive")
        object.__setattr__(self, "support_lo", 0.0)
        object.__setattr__(self, "support_hi", math.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0)))

    def _quantile(self, q):
        with np.errstate(divide="ignore"):
            return -np.log1p(-q) / self.rate

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0)))

    @property
    def is_continuous(self):
        return True

    def spec(self):
        return f"exp:{_fmt(self.rate)}"


@dataclass(frozen=True)
class TruncatedEqualRevenue(SingleDist):
    """Equal-revenue curve truncated at p: CDF 1 - 1/x on [1, p), atom 1/p at p."""

    p: float

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("truncation point must be >= 1")
        object.__setattr__(self, "support_lo", 1.0)
        object.__setattr__(self, "support_hi", self.p)

    @property
    def atom_mass(self) -> float:
        return 1.0 / self.p

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 1, 0.0, 1.0 - 1.0 / np.maximum(x, 1.0))
        return np.where(x >= self.p, 1.0, out)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 1, 0.0, 1.0 - 1.0 / np.maximum(x, 1.0))
        return np.where(x > self.p, 1.0, np.minimum(out, 1.0 - 1.0 / self.p))

    def _quantile(self, q):
        cutoff = 1.0 - 1.0 / self.p
        with np.errstate(divide="ignore"):
            body = 1.0 / (1.0 - np.minimum(q, cutoff))
        return np.where(q > cutoff, self.p, np.minimum(body, self.p))

    def pdf(self, x):
        # Continuous part only; the atom at p carries extra mass 1/p.
        x = np.asarray(x, dtype=float)
        inside = (x >= 1) & (x < self.p)
        return np.where(inside, 1.0 / np.maximum(x, 1.0) ** 2, 0.0)

    def quantile_breakpoints(self):
        return np.array([1.0 - 1.0 / self.p])

    def spec(self):
        return f"er:p={_fmt(self.p)}"


@dataclass(frozen=True)
class PointMass(SingleDist):
    v: float

    def __post_init__(self):
        object.__setattr__(self, "support_lo", self.v)
        object.__setattr__(self, "support_hi", self.v)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.v, 1.0, 0.0)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > self.v, 1.0, 0.0)

    def _quantile(self, q):
        return np.full_like(np.asarray(q, dtype=float), self.v)

    @property
    def purely_atomic(self):
        return True

    def spec(self):
        return f"point:{_fmt(self.v)}"


@dataclass(frozen=True)
class FiniteDiscrete(SingleDist):
    values: tuple = field()
    probs: tuple = field()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        pr = np.asarray(self.probs, dtype=float)
        if vals.ndim != 1 or pr.shape != vals.shape or vals.size == 0:
            raise ValueError("values and probs must be equal-length 1-d sequences")
        if np.any(np.diff(vals) <= 0):
            raise ValueError("values must be strictly ascending")
        if np.any(pr < 0) or abs(pr.sum() - 1.0) > _PROB_TOL:
            raise ValueError("probs must be nonnegative and sum to 1")
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "probs", tuple(pr))
        object.__setattr__(self, "_vals", vals)
        object.__setattr__(self, "_cum", np.cumsum(pr))
        object.__setattr__(self, "support_lo", float(vals[0]))
        object.__setattr__(self, "support_hi", float(vals[-1]))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._vals, x, side="right")
        cum = np.concatenate([[0.0], self._cum])
        return cum[idx]

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self._vals, x, side="left")
        cum = np.concatenate([[0.0], self._cum])
        return cum[idx]

    def _quantile(self, q):
        # Right-continuous inverse; ties broken toward the smaller value.
        idx = np.searchsorted(self._cum, q, side="left")
        idx = np.minimum(idx, len(self._vals) - 1)
        return self._vals[idx]

    @property
    def purely_atomic(self):
        return True

    def quantile_breakpoints(self):
        return self._cum[:-1].copy()

    def spec(self):
        v = ",".join(_fmt(x) for x in self.values)
        p = ",".join(_fmt(x) for x in self.probs)
        return f"discrete:v={v};p={p}"


@dataclass(frozen=True)
class ProductDist:
    """An ordered list of item marginals; bidder values are independent across items."""

    marginals: tuple

    def __post_init__(self):
        marg = tuple(self.marginals)
        if len(marg) == 0:
            raise ValueError("need at least one marginal")
        object.__setattr__(self, "marginals", marg)

    @property
    def m(self) -> int:
        return len(self.marginals)

    def sample_profiles(self, rng: np.random.Generator, n_bidders: int, n_profiles: int):
        """Draw coupled valuation profiles.

        Returns (values, quantiles), each of shape (n_profiles, n_bidders, m).
        One shared uniform per (bidder, item) cell provides both the value and
        the randomized quantile at atoms.
        """
        q = rng.random((n_profiles, n_bidders, self.m))
        v = np.empty_like(q)
        for j, d in enumerate(self.marginals):
            v[:, :, j] = d.quantile(q[:, :, j])
        return v, q

    def spec(self):
        return "x".join(d.spec() for d in self.marginals)


def _fmt(x) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def parse_dist(spec: str) -> SingleDist:
    """Parse a compact distribution spec string.

    Grammar: ``uniform:0,1``, ``er:p=10000``, ``exp:1``, ``point:5``,
    ``discrete:v=1,2;p=0.5,0.5``.
    """
    spec = spec.strip()
    try:
        kind, _, arg = spec.partition(":")
        kind = kind.lower()
        if kind == "uniform":
            lo, hi = (float(t) for t in arg.split(","))
            return Uniform(lo, hi)
        if kind == "exp":
            return Exponential(float(arg))
        if kind == "er":
            if arg.startswith("p="):
                arg = arg[2:]
            return TruncatedEqualRevenue(float(arg))
        if kind == "point":
            return PointMass(float(arg))
        if kind == "discrete":
            parts = dict(tok.split("=", 1) for tok in arg.split(";"))
            vals = tuple(float(t) for t in parts["v"].split(","))
            probs = tuple(float(t) for t in parts["p"].split(","))
            return FiniteDiscrete(vals, probs)
    except (ValueError, KeyError) as exc:
        raise ValueError(f"bad distribution spec {spec!r}") from exc
    raise ValueError(f"unknown distribution kind in {spec!r}")
