"""Ideal gambling assets, fairness of odds, and reverse information projection.

An ideal gambling asset pays ``o_j`` if outcome ``j`` happens and nothing
otherwise. A market whose every asset is a portfolio of such assets can be
analysed entirely in terms of probability vectors over outcomes: holding
portfolio ``c`` of ideal assets yields ``W = sum_j p_j ln(c_j o_j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linprog

from ._interior import ZeroObjectiveRow
from .divergence import kl_divergence
from .dominance import prune
from .errors import EmbeddingError, InfeasibleError, MarketError
from .logopt import PortfolioConstraints, maximize_growth
from .market import Market, _frozen, as_distribution, as_portfolio, deduplicate_outcomes, growth_rate

FAIRNESS_TOL = 1e-12


def as_odds(odds) -> np.ndarray:
    o = np.asarray(odds, dtype=float).ravel()
    if o.size == 0 or not np.all(np.isfinite(o)) or np.any(o <= 0):
        raise MarketError("odds must be finite and strictly positive")
    return _frozen(o)


@dataclass(frozen=True)
class Embedding:
    """Original assets written as portfolios of ideal gambling assets.

    ``weights[i]`` is asset ``i``'s portfolio over the ``m`` ideal assets,
    so ``weights[i, j] * odds[j]`` reproduces the price relative of asset
    ``i`` under outcome ``j``.
    """

    odds: np.ndarray
    weights: np.ndarray

    @property
    def ideal_market(self) -> Market:
        return Market.gambling(self.odds)

    def embed(self, b) -> np.ndarray:
        """Image of an original portfolio among the ideal assets."""
        b = np.asarray(b, dtype=float)
        return _frozen(b @ self.weights)

    def reconstruct(self) -> np.ndarray:
        """Price relative matrix implied by the embedding (``m x k``)."""
        return (self.weights * self.odds).T


def embed_ideal(market: Market) -> Embedding:
    """Express every asset as a portfolio of ``m`` ideal gambling assets.

    Looks for ``u > 0`` with ``sum_j X[j, i] u_j = 1`` for each asset; the
    odds are ``1 / u``. Among several solutions the one maximising
    ``min_j u_j`` is taken.
    """
    X = market.price_relatives
    m, k = X.shape
    # variables u (m) and t; maximise t subject to X^T u = 1, u >= t
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_eq = np.hstack([X.T, np.zeros((k, 1))])
    A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    res = linprog(
        c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=np.ones(k),
        bounds=[(0, None)] * m + [(None, 1.0)], method="highs",
    )
    lsq = np.linalg.lstsq(X.T, np.ones(k), rcond=None)[0]
    residual = float(np.linalg.norm(X.T @ lsq - 1.0))
    if res.status != 0 or res.x[-1] <= 1e-12:
        raise EmbeddingError("no exact embedding into ideal gambling assets", residual)
    u = res.x[:m]
    u = u - np.linalg.pinv(X.T) @ (X.T @ u - 1.0)
    if np.any(u <= 0) or np.max(np.abs(X.T @ u - 1.0)) > 1e-9:
        raise EmbeddingError("no exact embedding into ideal gambling assets", residual)
    weights = X.T * u
    return Embedding(odds=_frozen(1.0 / u), weights=_frozen(weights))


class Fairness(str, enum.Enum):
    FAIR = "fair"
    SUPERFAIR = "superfair"
    SUBFAIR = "subfair"


def classify_fairness(odds) -> tuple[Fairness, float]:
    """Compare ``sum 1/o_j`` with 1. Returns the class and the sum."""
    s = float(np.sum(1.0 / as_odds(odds)))
    if abs(s - 1.0) <= FAIRNESS_TOL:
        return Fairness.FAIR, s
    return (Fairness.SUPERFAIR if s < 1.0 else Fairness.SUBFAIR), s


def dutch_book(odds) -> Optional[tuple[np.ndarray, float]]:
    """Riskless winning portfolio for superfair odds, else ``None``.

    Betting ``b_j = (1/o_j) / sum(1/o)`` returns ``1 / sum(1/o)`` whatever
    happens.
    """
    o = as_odds(odds)
    fairness, s = classify_fairness(o)
    if fairness is not Fairness.SUPERFAIR:
        return None
    b = (1.0 / o) / s
    return _frozen(b), 1.0 / s


def is_kelly_market(market: Market) -> Optional[np.ndarray]:
    """Odds of the equivalent Kelly gambling market, or ``None``.

    Dominated assets are removed first (including ones only matched by a
    portfolio of the others) and identical outcome rows are merged. What
    remains must be square with exactly one positive entry per row and
    per column. Odds are listed in the order of the surviving assets.
    """
    reduced = prune(market, weak=True).market
    reduced = deduplicate_outcomes(reduced)[0]
    X = reduced.price_relatives
    m, k = X.shape
    if m != k:
        return None
    positive = X > 0
    if not (np.all(positive.sum(axis=1) == 1) and np.all(positive.sum(axis=0) == 1)):
        return None
    row_of_asset = np.argmax(positive, axis=0)
    return _frozen(X[row_of_asset, np.arange(k)])


class IProjection(NamedTuple):
    q: np.ndarray
    divergence: float
    unique: bool


def reverse_iprojection(p, constraints: Optional[PortfolioConstraints] = None) -> IProjection:
    """``argmin_{q in C} D(p || q)`` over the simplex intersected with ``constraints``.

    The minimiser is unique on the support of ``p``; elsewhere it may be
    free to move, in which case ``unique`` is False and the point returned
    is the one the barrier path from the analytic centre converges to.
    """
    p = as_distribution(p)
    m = p.size
    if constraints is None:
        return IProjection(p, 0.0, True)
    if constraints.k != m:
        raise MarketError(f"constraints are over {constraints.k} outcomes, p has {m}")
    ident = Market(np.eye(m))
    G = np.vstack([-np.eye(m), constraints.coefficients])
    h = np.concatenate([np.zeros(m), constraints.bounds])
    try:
        q, _, _ = maximize_growth(ident, p, np.ones((1, m)), [1.0], G, h)
    except ZeroObjectiveRow as exc:
        raise InfeasibleError("every feasible q has infinite divergence from p") from exc
    q = np.maximum(q, 0.0)
    q = as_distribution(q / q.sum())
    return IProjection(q, kl_divergence(p, q), _projection_unique(p, q, G, h))


def _projection_unique(p, q, G, h, tol=1e-9) -> bool:
    m = p.size
    free = np.flatnonzero(p == 0)
    if free.size == 0:
        return True
    fixed = np.flatnonzero(p > 0)
    A_eq = np.vstack([np.ones((1, m)), np.eye(m)[fixed]])
    b_eq = np.concatenate([[1.0], q[fixed]])
    for j in free:
        c = np.zeros(m)
        c[j] = 1.0
        lo = linprog(c, A_ub=G, b_ub=h + 1e-10, A_eq=A_eq, b_eq=b_eq, bounds=[(None, None)] * m, method="highs")
        hi = linprog(-c, A_ub=G, b_ub=h + 1e-10, A_eq=A_eq, b_eq=b_eq, bounds=[(None, None)] * m, method="highs")
        if lo.status == 0 and hi.status == 0 and -hi.fun - lo.fun > tol:
            return False
    return True


def portfolio_growth_in_ideal(embedding: Embedding, b, p) -> float:
    """Growth of original portfolio ``b`` computed through its ideal-asset image."""
    c = embedding.embed(as_portfolio(b))
    c = c / c.sum()
    return growth_rate(embedding.ideal_market, c, p)
