"""Dominance between portfolios and pruning of dominated assets."""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from .market import Market, as_portfolio

STRICT_TOL = 1e-10
WEAK_TOL = 1e-12


def dominates(market: Market, b1, b2) -> bool:
    """``b1`` pays at least as much as ``b2`` under every outcome (exact comparison)."""
    b1 = as_portfolio(b1, market.k)
    b2 = as_portfolio(b2, market.k)
    return bool(np.all(market.payoffs(b1) >= market.payoffs(b2)))


def strictly_dominates(market: Market, b1, b2) -> bool:
    b1 = as_portfolio(b1, market.k)
    b2 = as_portfolio(b2, market.k)
    return bool(np.all(market.payoffs(b1) > market.payoffs(b2)))


def basis_domination_witness(market: Market, b1, b2) -> Optional[int]:
    """An asset ``i`` held by ``b2`` whose basis portfolio ``b1`` strictly dominates.

    Note that strict dominance of ``b2`` by ``b1`` does not by itself
    guarantee such an asset exists: against a mix of two gambling assets a
    safe asset can win everywhere without beating either one alone.
    """
    b1 = as_portfolio(b1, market.k)
    b2 = as_portfolio(b2, market.k)
    y = market.payoffs(b1)
    for i in np.flatnonzero(b2 > 0):
        if np.all(y > market.price_relatives[:, i]):
            return int(i)
    return None


def domination_margin(market: Market, i: int, among=None) -> tuple[float, Optional[np.ndarray]]:
    """Best worst-case margin by which a portfolio of other assets beats asset ``i``.

    Solves ``max_w min_j (<X_j, w> - X_{j,i})`` over portfolios ``w`` on the
    assets in ``among`` (default: every asset except ``i``). A positive
    margin means ``e_i`` is strictly dominated, zero means weakly.
    Returns the margin and the dominating portfolio over all ``k`` assets.
    """
    k = market.k
    others = [a for a in (range(k) if among is None else among) if a != i]
    if not others:
        return -np.inf, None
    X = market.price_relatives
    n = len(others)
    # variables: weights on `others`, then the margin s
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-X[:, others], np.ones((market.m, 1))])
    b_ub = -X[:, i]
    A_eq = np.concatenate([np.ones(n), [0.0]])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * n + [(None, None)], method="highs")
    w = np.zeros(k)
    w[others] = np.maximum(res.x[:n], 0.0)
    w /= w.sum()
    # recompute from the portfolio itself so the margin is exact for the returned weights
    margin = float(np.min(X @ w - X[:, i]))
    return margin, w


def basis_dominance_matrix(market: Market) -> np.ndarray:
    """Entry ``[a, b]`` is 2 if ``e_a`` strictly dominates ``e_b``, 1 if weakly, else 0."""
    X = market.price_relatives
    k = market.k
    out = np.zeros((k, k), dtype=int)
    for a in range(k):
        for b in range(k):
            if np.all(X[:, a] > X[:, b]):
                out[a, b] = 2
            elif np.all(X[:, a] >= X[:, b]):
                out[a, b] = 1
    return out


class PruneResult(NamedTuple):
    market: Market
    removed: tuple[int, ...]
    weakly_dominated: tuple[int, ...]


def prune(market: Market, weak: bool = False) -> PruneResult:
    """Drop assets dominated by portfolios of the remaining assets, to a fixed point.

    By default only strictly dominated assets go. ``weakly_dominated``
    lists surviving assets that some portfolio of the others matches or
    beats everywhere; pass ``weak=True`` to remove those as well (one at a
    time, so of two identical assets one survives).
    """
    remaining = list(range(market.k))
    removed = []
    changed = True
    while changed and len(remaining) > 1:
        changed = False
        for i in remaining:
            margin, _ = domination_margin(market, i, remaining)
            if margin > STRICT_TOL or (weak and margin >= -WEAK_TOL):
                remaining.remove(i)
                removed.append(i)
                changed = True
                break
    weakly = tuple(
        i for i in remaining if len(remaining) > 1 and domination_margin(market, i, remaining)[0] >= -WEAK_TOL
    )
    return PruneResult(market.select_assets(remaining), tuple(removed), weakly)
