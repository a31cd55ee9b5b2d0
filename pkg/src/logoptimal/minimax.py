"""Minimax regret over a finite family of distributions.

For a family ``p_1..p_n`` the minimax regret is

    C = min_b max_i (F(p_i) - W(b, p_i))  =  max_t (sum_i t_i F(p_i) - F(sum_i t_i p_i))

The right-hand form is what the mixture player ascends: against a mixture
``t`` the best portfolio is simply the log-optimal one for the barycenter,
and the per-member regrets of that portfolio are the gradient of the
concave dual objective. Mixture weights are updated multiplicatively on
those regrets. If that has not closed the duality gap within a modest
number of rounds the primal problem is solved directly with a barrier
method whose multipliers give the worst-case mixture.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from ._interior import barrier_minimize
from .divergence import action_regret
from .errors import ConvergenceError, MarketError
from .logopt import solve
from .market import Market, _frozen, as_distribution, as_portfolio, growth_rate

GAP_TOL = 1e-6
MAX_ROUNDS = 100_000
MW_ROUNDS = 30


@dataclass(frozen=True)
class MinimaxReport:
    value: float
    robust_portfolio: np.ndarray
    worst_mixture: np.ndarray
    barycenter: np.ndarray
    duality_gap: float
    upper: float
    lower: float
    rounds: int


def _family(market: Market, family) -> np.ndarray:
    P = np.array([as_distribution(p, market.m) for p in family])
    if P.shape[0] == 0:
        raise MarketError("family must be nonempty")
    return P


def _regrets(market: Market, F: np.ndarray, P: np.ndarray, b) -> np.ndarray:
    return np.array([F[i] - growth_rate(market, b, P[i]) for i in range(len(F))])


def _dual_value(market: Market, F: np.ndarray, P: np.ndarray, t: np.ndarray):
    """``inf_b sum t_i regret_i(b)``, attained at the optimum for the barycenter."""
    s = as_distribution(np.clip(t @ P, 0.0, None) / np.sum(t @ P), market.m)
    b = solve(market, s).portfolio
    r = _regrets(market, F, P, b)
    # members with zero weight may have infinite regret; they do not count
    held = t > 0
    return float(t[held] @ r[held]), b, r


def _barrier_primal(market: Market, F: np.ndarray, P: np.ndarray):
    """Solve ``min z`` s.t. ``F_i - W(b, p_i) <= z`` over the simplex."""
    k = market.k
    n = len(F)
    live = [np.flatnonzero(P[i] > 0) for i in range(n)]
    Xs = [market.price_relatives[idx] for idx in live]
    ws = [P[i][idx] for i, idx in enumerate(live)]

    b0 = np.full(k, 1.0 / k)
    z0 = float(np.max(_regrets(market, F, P, b0))) + 1.0
    x0 = np.concatenate([b0, [z0]])
    N = null_space(np.concatenate([np.ones(k), [0.0]])[None, :])

    def f0(x):
        g = np.zeros(k + 1)
        g[-1] = 1.0
        return x[-1], g, np.zeros((k + 1, k + 1))

    def slacks(x):
        b, z = x[:k], x[-1]
        out = []
        for i in range(n):
            r = Xs[i] @ b
            if np.any(r <= 0):
                return None
            out.append((z - F[i] + ws[i] @ np.log(r), r))
        return out

    def barrier(x):
        b = x[:k]
        if np.any(b <= 0):
            return None
        sl = slacks(x)
        if sl is None or any(u <= 0 for u, _ in sl):
            return None
        val = -np.sum(np.log(b))
        grad = np.zeros(k + 1)
        grad[:k] = -1.0 / b
        hess = np.zeros((k + 1, k + 1))
        hess[:k, :k] = np.diag(1.0 / b**2)
        for i, (u, r) in enumerate(sl):
            q = ws[i] / r
            du = np.concatenate([Xs[i].T @ q, [1.0]])
            d2u = np.zeros((k + 1, k + 1))
            d2u[:k, :k] = -(Xs[i].T * (q / r)) @ Xs[i]
            val -= np.log(u)
            grad -= du / u
            hess += np.outer(du, du) / u**2 - d2u / u
        return val, grad, hess

    x, gap, steps = barrier_minimize(x0, N, f0, barrier, n_constraints=n + k, gap_tol=1e-10)
    b = np.maximum(x[:k], 0.0)
    b /= b.sum()
    u = np.array([s for s, _ in slacks(x)])
    lam = 1.0 / u
    return b, lam / lam.sum(), steps


def minimax_regret(market: Market, family: Sequence, tol: float = GAP_TOL, max_rounds: int = MAX_ROUNDS) -> MinimaxReport:
    """Minimax portfolio, worst-case mixture and value for a finite family.

    The returned ``value`` is the midpoint of the certified bounds
    ``lower <= C <= upper``; ``duality_gap = upper - lower``.
    """
    P = _family(market, family)
    n = P.shape[0]
    F = np.array([solve(market, p).growth for p in P])

    t = np.full(n, 1.0 / n)
    best_upper, best_b = np.inf, None
    best_lower, best_t = -np.inf, None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        lower, b, r = _dual_value(market, F, P, t)
        upper = float(np.max(r))
        if upper < best_upper:
            best_upper, best_b = upper, b
        if lower > best_lower:
            best_lower, best_t = lower, t
        if best_upper - best_lower <= tol or rounds >= MW_ROUNDS or not np.all(np.isfinite(r)):
            break
        t = t * np.exp(r - r.max())
        t /= t.sum()

    if best_upper - best_lower > tol:
        b, t, _ = _barrier_primal(market, F, P)
        upper = float(np.max(_regrets(market, F, P, b)))
        if upper < best_upper:
            best_upper, best_b = upper, b
        lower = _dual_value(market, F, P, t)[0]
        if lower > best_lower:
            best_lower, best_t = lower, t
        if best_upper - best_lower > tol:
            raise ConvergenceError(f"minimax duality gap {best_upper - best_lower:.3e} above {tol:.1e}")

    gap = max(best_upper - best_lower, 0.0)
    bary = best_t @ P
    return MinimaxReport(
        value=0.5 * (best_upper + best_lower),
        robust_portfolio=_frozen(best_b),
        worst_mixture=_frozen(best_t),
        barycenter=_frozen(bary / bary.sum()),
        duality_gap=gap,
        upper=best_upper,
        lower=best_lower,
        rounds=rounds,
    )


@dataclass(frozen=True)
class BoundCheck:
    bound: float
    holds: bool
    bound_with_robust: float
    holds_with_robust: bool


def lower_bound_check(market: Market, family: Sequence, t, report: MinimaxReport | None = None) -> BoundCheck:
    """Check ``C >= inf_b sum t_i regret(p_i, b) + regret(s, a)`` for mixture ``t``.

    With ``a`` optimal for the barycenter ``s`` the last term vanishes;
    the alternative reading with ``a`` the robust portfolio is reported
    alongside.
    """
    P = _family(market, family)
    t = as_distribution(t, P.shape[0])
    report = report or minimax_regret(market, family)
    F = np.array([solve(market, p).growth for p in P])
    base, b_opt, _ = _dual_value(market, F, P, t)
    s = t @ P
    s = s / s.sum()
    bound = base + action_regret(market, s, b_opt)
    alt = base + action_regret(market, s, report.robust_portfolio)
    return BoundCheck(
        bound=bound,
        holds=bound <= report.value + 1e-8 + report.duality_gap,
        bound_with_robust=alt,
        holds_with_robust=alt <= report.value + 1e-8 + report.duality_gap,
    )


@dataclass(frozen=True)
class SaddleCheck:
    sup_regret: float
    required: float
    holds: bool


def saddle_check(market: Market, family: Sequence, b, report: MinimaxReport | None = None) -> SaddleCheck:
    """Check ``max_i regret(p_i, b) >= C + regret(s, b)`` with ``s`` the worst-case barycenter."""
    P = _family(market, family)
    b = as_portfolio(b, market.k)
    report = report or minimax_regret(market, family)
    F = np.array([solve(market, p).growth for p in P])
    sup = float(np.max(_regrets(market, F, P, b)))
    required = report.value + action_regret(market, report.barycenter, b)
    return SaddleCheck(sup_regret=sup, required=required, holds=sup >= required - 1e-6)
