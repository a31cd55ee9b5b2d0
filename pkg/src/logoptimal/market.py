"""Markets, distributions, portfolios and the doubling rate.

A market is an ``m x k`` matrix of price relatives: row ``j`` is the price
relative vector realised under outcome ``j`` and column ``i`` is asset ``i``.
Distributions are probability vectors over outcomes, portfolios are
probability vectors over assets. Both are plain read-only numpy arrays.

Growth rates use the natural logarithm. A growth rate is a float that may
be ``NEG_INFINITY`` but is never ``+inf`` or NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import MarketError

NEG_INFINITY = -math.inf
POS_INFINITY = math.inf

SIMPLEX_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Market:
    price_relatives: np.ndarray
    asset_names: tuple[str, ...] = field(default=())
    outcome_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        x = np.asarray(self.price_relatives, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise MarketError(f"price relatives must be a non-empty m x k matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise MarketError("price relatives must be finite")
        if np.any(x < 0):
            j, i = np.argwhere(x < 0)[0]
            raise MarketError(f"negative price relative at outcome {j}, asset {i}")
        dead_rows = np.flatnonzero(~np.any(x > 0, axis=1))
        if dead_rows.size:
            raise MarketError(f"outcome {dead_rows[0]} has no asset with a positive price relative")
        dead_cols = np.flatnonzero(~np.any(x > 0, axis=0))
        if dead_cols.size:
            raise MarketError(f"asset {dead_cols[0]} is worthless under every outcome")
        m, k = x.shape
        assets = tuple(self.asset_names) or tuple(f"asset{i}" for i in range(k))
        outcomes = tuple(self.outcome_names) or tuple(f"outcome{j}" for j in range(m))
        if len(assets) != k:
            raise MarketError(f"expected {k} asset names, got {len(assets)}")
        if len(outcomes) != m:
            raise MarketError(f"expected {m} outcome names, got {len(outcomes)}")
        object.__setattr__(self, "price_relatives", _frozen(x))
        object.__setattr__(self, "asset_names", assets)
        object.__setattr__(self, "outcome_names", outcomes)

    @property
    def m(self) -> int:
        """Number of outcomes."""
        return self.price_relatives.shape[0]

    @property
    def k(self) -> int:
        """Number of assets."""
        return self.price_relatives.shape[1]

    def payoffs(self, b) -> np.ndarray:
        """Price relative of portfolio ``b`` under each outcome."""
        return self.price_relatives @ np.asarray(b, dtype=float)

    def select_assets(self, idx: Sequence[int]) -> "Market":
        idx = list(idx)
        return Market(self.price_relatives[:, idx], tuple(self.asset_names[i] for i in idx), self.outcome_names)

    def select_outcomes(self, idx: Sequence[int]) -> "Market":
        idx = list(idx)
        return Market(self.price_relatives[idx, :], self.asset_names, tuple(self.outcome_names[j] for j in idx))

    @classmethod
    def gambling(cls, odds: Iterable[float]) -> "Market":
        """Kelly market: outcome ``j`` pays ``odds[j]`` on asset ``j`` only."""
        return cls(np.diag(np.asarray(list(odds), dtype=float)))


def _check_simplex(v, n: int | None, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise MarketError(f"{what} must be a vector")
    if n is not None and v.size != n:
        raise MarketError(f"{what} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise MarketError(f"{what} entries must be finite and nonnegative")
    if abs(v.sum() - 1.0) > SIMPLEX_TOL * max(1, v.size):
        raise MarketError(f"{what} must sum to 1, sums to {v.sum()!r}")
    return _frozen(v)


def as_distribution(probs, m: int | None = None) -> np.ndarray:
    """Validate a probability vector over outcomes."""
    return _check_simplex(probs, m, "distribution")


def as_portfolio(weights, k: int | None = None) -> np.ndarray:
    """Validate a portfolio (probability vector over assets)."""
    return _check_simplex(weights, k, "portfolio")


def uniform(n: int) -> np.ndarray:
    return _frozen(np.full(n, 1.0 / n))


def basis(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return _frozen(e)


def support(v, tol: float = 0.0) -> np.ndarray:
    return np.flatnonzero(np.asarray(v) > tol)


def _expected_log(payoffs: np.ndarray, p: np.ndarray) -> float:
    live = p > 0
    r = payoffs[live]
    if np.any(r <= 0):
        return NEG_INFINITY
    return float(np.dot(p[live], np.log(r)))


def growth_rate(market: Market, b, p) -> float:
    """Expected log price relative ``sum_j p_j ln <X_j, b>``.

    Outcomes with zero probability contribute nothing, even when the
    portfolio is wiped out under them.
    """
    b = as_portfolio(b, market.k)
    p = as_distribution(p, market.m)
    return _expected_log(market.payoffs(b), p)


def wealth_trajectory(market: Market, b, outcomes: Sequence[int]) -> np.ndarray:
    """Wealth ``S_1..S_n`` of a constant rebalanced portfolio, starting from ``S_0 = 1``."""
    b = as_portfolio(b, market.k)
    idx = _check_outcomes(outcomes, market.m)
    return np.cumprod(market.payoffs(b)[idx])


def empirical_distribution(outcomes: Sequence[int], m: int) -> np.ndarray:
    idx = _check_outcomes(outcomes, m)
    if idx.size == 0:
        raise MarketError("empirical distribution of an empty sequence")
    return _frozen(np.bincount(idx, minlength=m) / idx.size)


def _check_outcomes(outcomes, m: int) -> np.ndarray:
    idx = np.asarray(list(outcomes), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= m):
        bad = idx[(idx < 0) | (idx >= m)][0]
        raise MarketError(f"outcome index {bad} out of range for {m} outcomes")
    return idx


def deduplicate_outcomes(market: Market, *dists) -> tuple:
    """Merge identical price relative rows, summing probability mass.

    Returns the reduced market, the row-to-group index map, followed by
    each given distribution with its mass merged.
    """
    x = market.price_relatives
    uniq, first, inverse = np.unique(x, axis=0, return_index=True, return_inverse=True)
    # keep groups in order of first appearance
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    groups = rank[np.asarray(inverse).ravel()]
    reduced = Market(uniq[order], market.asset_names, tuple(market.outcome_names[j] for j in first[order]))
    merged = []
    for p in dists:
        p = np.asarray(p, dtype=float)
        merged.append(_frozen(np.bincount(groups, weights=p, minlength=order.size)))
    return (reduced, groups, *merged)
