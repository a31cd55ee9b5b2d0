"""Regret of portfolios and distributions, and information divergence.

The regret of acting optimally for ``q`` when the outcome distribution is
``p`` is ``F(p) - W(b_q, p)`` where ``F(p) = max_b W(b, p)``. When ``q`` has
several optimal portfolios the smallest regret among them is used. In a
Kelly gambling market this regret is exactly ``D(p || q)``; in any market
it is at most ``D(p || q)``.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy.special import rel_entr

from ._interior import ZeroObjectiveRow
from .errors import IndeterminateError, MarketError
from .logopt import maximize_growth, optimal_face, solve
from .market import (
    NEG_INFINITY,
    POS_INFINITY,
    Market,
    as_distribution,
    as_portfolio,
    growth_rate,
)


def kl_divergence(p, q) -> float:
    """``sum_j p_j ln(p_j / q_j)`` in nats; ``inf`` when ``p`` is not absolutely continuous wrt ``q``."""
    p = as_distribution(p)
    q = as_distribution(q)
    if p.size != q.size:
        raise MarketError(f"length mismatch: {p.size} vs {q.size}")
    d = float(np.sum(rel_entr(p, q)))
    return max(d, 0.0)


def _regret(best: float, achieved: float) -> float:
    if achieved == NEG_INFINITY:
        return POS_INFINITY
    return max(best - achieved, 0.0)


def action_regret(market: Market, p, b) -> float:
    """Growth given up by holding ``b`` instead of a log-optimal portfolio for ``p``."""
    p = as_distribution(p, market.m)
    b = as_portfolio(b, market.k)
    return _regret(solve(market, p).growth, growth_rate(market, b, p))


def best_growth_on_face(market: Market, p, q) -> float:
    """``max W(b, p)`` over the portfolios that are optimal for ``q``."""
    face = optimal_face(market, q)
    w_face = growth_rate(market, face.portfolio, p)
    covered = np.all(np.isin(np.flatnonzero(np.asarray(p) > 0), face.outcomes))
    if face.unique or covered:
        # every optimizer for q shares the same payoff wherever p lives
        return w_face
    best_p = solve(market, p)
    if face.contains(market, best_p.portfolio):
        return best_p.growth
    k = market.k
    outside = np.setdiff1d(np.arange(k), face.active)
    E = np.vstack([market.price_relatives[face.outcomes], np.ones((1, k)), np.eye(k)[outside]])
    f = np.concatenate([face.payoff, [1.0], np.zeros(outside.size)])
    try:
        b, _, _ = maximize_growth(market, np.asarray(p), E, f, -np.eye(k), np.zeros(k))
    except ZeroObjectiveRow:
        return w_face
    b = np.maximum(b, 0.0)
    b /= b.sum()
    return max(w_face, growth_rate(market, b, p))


def distribution_regret(market: Market, p, q) -> float:
    """Regret ``F(p) - W(b_q, p)``, minimised over all optimal ``b_q``."""
    p = as_distribution(p, market.m)
    q = as_distribution(q, market.m)
    return _regret(solve(market, p).growth, best_growth_on_face(market, p, q))


def cover_gap(market: Market, p, q) -> float:
    """``D(p || q)`` minus the distribution regret; nonnegative up to round-off."""
    d = kl_divergence(p, q)
    r = distribution_regret(market, p, q)
    if math.isinf(d) and math.isinf(r):
        raise IndeterminateError("indeterminate gap: divergence and regret are both infinite")
    return d - r


def bregman_identity_residual(market: Market, mixture: Iterable[tuple[float, object]], q) -> float:
    """Absolute defect of the Bregman identity for the given mixture.

    ``sum t_i R(p_i, q) = sum t_i R(p_i, s) + R(s, q)`` with ``s = sum t_i p_i``
    and ``R`` the distribution regret. Exact when ``q`` and ``s`` have a
    unique optimal payoff; can fail otherwise.
    """
    pairs = [(float(t), as_distribution(p, market.m)) for t, p in mixture]
    if not pairs:
        raise MarketError("empty mixture")
    t = np.array([w for w, _ in pairs])
    as_distribution(t)
    s = as_distribution(np.clip(sum(w * p for w, p in pairs), 0.0, None) / t.sum(), market.m)
    q = as_distribution(q, market.m)
    lhs = sum(w * distribution_regret(market, p, q) for w, p in pairs if w > 0)
    rhs = sum(w * distribution_regret(market, p, s) for w, p in pairs if w > 0) + distribution_regret(market, s, q)
    if math.isinf(lhs) or math.isinf(rhs):
        raise IndeterminateError("Bregman identity needs finite regrets")
    return abs(lhs - rhs)
