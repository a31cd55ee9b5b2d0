"""Growth-optimal portfolio solver with KKT certification.

The unconstrained problem ``max_b sum_j p_j ln <X_j, b>`` over the simplex is
solved by the multiplicative fixed-point iteration
``b_i <- b_i E_p[X_i / <X, b>]`` started from the uniform portfolio. Once
the iterate has revealed which assets carry weight, a Newton step on that
face of the simplex finishes the job and zeroes the rest exactly.

With extra linear constraints a log-barrier path-following method is used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from ._interior import barrier_minimize, linear_barrier, relative_interior
from .errors import ConvergenceError, InfeasibleError, MarketError
from .market import (
    NEG_INFINITY,
    Market,
    _expected_log,
    _frozen,
    as_distribution,
    as_portfolio,
)

MAX_ITER = 100_000
GROWTH_TOL = 1e-12
KKT_TOL = 1e-9
FACE_TOL = 1e-8


class Uniqueness(str, enum.Enum):
    UNIQUE = "unique"
    NON_UNIQUE = "non-unique"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PortfolioConstraints:
    """Linear constraints ``coefficients @ b <= bounds`` on top of the simplex."""

    coefficients: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        d = np.asarray(self.bounds, dtype=float).ravel()
        if c.shape[0] != d.size:
            raise MarketError(f"{c.shape[0]} constraint rows but {d.size} bounds")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(d))):
            raise MarketError("constraint data must be finite")
        k = c.shape[1]
        res = linprog(
            np.zeros(k), A_ub=c, b_ub=d, A_eq=np.ones((1, k)), b_eq=[1.0], bounds=[(0, None)] * k, method="highs"
        )
        if res.status != 0:
            raise InfeasibleError("portfolio constraints exclude every portfolio")
        object.__setattr__(self, "coefficients", _frozen(c))
        object.__setattr__(self, "bounds", _frozen(d))

    @property
    def k(self) -> int:
        return self.coefficients.shape[1]

    def is_feasible(self, b, tol: float = 1e-9) -> bool:
        b = np.asarray(b, dtype=float)
        return bool(np.all(self.coefficients @ b <= self.bounds + tol))

    @classmethod
    def upper_bounds(cls, caps: Sequence[float]) -> "PortfolioConstraints":
        """Per-asset caps ``b_i <= caps[i]``."""
        caps = np.asarray(caps, dtype=float)
        return cls(np.eye(caps.size), caps)


@dataclass(frozen=True)
class SolveReport:
    """Result of :func:`solve`.

    For constrained solves ``kkt_residual`` holds the barrier method's
    bound on the growth shortfall instead of the simplex KKT residual.
    """

    portfolio: np.ndarray
    growth: float
    kkt_residual: float
    iterations: int
    unique: Uniqueness


@dataclass(frozen=True)
class OptimalFace:
    """Set of growth-optimal portfolios for one distribution.

    Every optimizer is supported on ``active`` and produces the payoff
    ``payoff`` on the outcomes in ``outcomes`` (those with positive
    probability).
    """

    active: tuple[int, ...]
    unique: bool
    portfolio: np.ndarray
    outcomes: np.ndarray
    payoff: np.ndarray

    def contains(self, market: Market, b, tol: float = 1e-9) -> bool:
        b = np.asarray(b, dtype=float)
        outside = np.setdiff1d(np.arange(b.size), self.active)
        if np.any(b[outside] > tol):
            return False
        y = market.price_relatives[self.outcomes] @ b
        return bool(np.all(np.abs(y - self.payoff) <= tol * np.maximum(1.0, self.payoff)))


def _gradient(X: np.ndarray, p: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``E_p[X_i / <X, b>]`` for every asset (``X`` restricted to live outcomes)."""
    return X.T @ (p / (X @ b))


def _residual(g: np.ndarray, b: np.ndarray) -> float:
    upper = np.max(np.maximum(g - 1.0, 0.0))
    held = b > 0
    on_support = np.max(np.abs(g[held] - 1.0)) if np.any(held) else 0.0
    return float(max(upper, on_support))


def kkt_residual(market: Market, p, b) -> float:
    """Violation of the log-optimality conditions at ``b``.

    ``b`` is log-optimal for ``p`` exactly when ``E_p[X_i / <X, b>] <= 1``
    for every asset, with equality on the assets it holds.
    """
    p = as_distribution(p, market.m)
    b = as_portfolio(b, market.k)
    live = p > 0
    X = market.price_relatives[live]
    if np.any(X @ b <= 0):
        raise InfeasibleError("portfolio infeasible for p: zero payoff on a positive-probability outcome")
    return _residual(_gradient(X, p[live], b), b)


def _face_newton(X, p, start, active):
    """Maximise growth over the simplex face spanned by ``active``.

    Starts from ``start`` renormalised onto the face. Coordinates that the
    Newton direction drives to zero leave the face.
    """
    active = list(active)
    b = np.zeros(X.shape[1])
    b[active] = start[active] / start[active].sum()
    for _ in range(200):
        n = len(active)
        if n == 1:
            b[:] = 0.0
            b[active[0]] = 1.0
            break
        XA = X[:, active]
        bA = b[active]
        r = XA @ bA
        if np.any(r <= 0):
            return None
        w = p / r
        g = XA.T @ w
        H = (XA.T * (w / r)) @ XA
        # directions keeping the weights summing to one
        Z = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])
        gz = Z.T @ g
        step = np.linalg.lstsq(Z.T @ H @ Z, gz, rcond=None)[0]
        d = Z @ step
        dec = float(gz @ step)
        if dec <= 1e-30:
            break
        neg = d < 0
        ratios = np.full(n, np.inf)
        ratios[neg] = bA[neg] / -d[neg]
        j = int(np.argmin(ratios))
        amax = float(ratios[j])
        alpha = min(1.0, amax)
        if dec > 1e-20:
            f_old = float(p @ np.log(r))
            while alpha > 1e-14:
                rn = XA @ (bA + alpha * d)
                if np.all(rn > 0) and p @ np.log(rn) >= f_old + 0.25 * alpha * dec:
                    break
                alpha *= 0.5
            else:
                break
        newA = np.maximum(bA + alpha * d, 0.0)
        blocked = alpha == amax
        if blocked:
            newA[j] = 0.0
        b[active] = newA
        b /= b.sum()
        if blocked:
            active.pop(j)
        elif dec < 1e-26:
            break
    return b


def _polish(X, p, b, threshold):
    active = np.flatnonzero(b > threshold * b.max())
    cand = _face_newton(X, p, b, active)
    if cand is None or np.any(X @ cand <= 0):
        return None
    if _residual(_gradient(X, p, cand), cand) > 1e-11:
        return None
    return cand


def _solve_simplex(X: np.ndarray, p: np.ndarray):
    """Unconstrained solve on live outcomes/assets. Returns (b, iterations)."""
    k = X.shape[1]
    b = np.full(k, 1.0 / k)
    if k == 1:
        return b, 0
    growth = float(p @ np.log(X @ b))
    schedule = {1, 3, 10, 30, 100, 300}
    for it in range(1, MAX_ITER + 1):
        g = _gradient(X, p, b)
        if _residual(g, b) <= 1e-13:
            return b, it - 1
        b = b * g
        b /= b.sum()
        new_growth = float(p @ np.log(X @ b))
        if abs(new_growth - growth) < GROWTH_TOL and _residual(_gradient(X, p, b), b) < KKT_TOL:
            # the MU iterate never reaches exact zeros, so still prefer a polished point
            polished = _polish(X, p, b, 1e-8)
            return (polished if polished is not None else b), it
        growth = new_growth
        if it in schedule or it % 1000 == 0:
            for threshold in (1e-3, 1e-8):
                polished = _polish(X, p, b, threshold)
                if polished is not None and p @ np.log(X @ polished) >= growth - 1e-13:
                    return polished, it
    raise ConvergenceError(f"no convergence after {MAX_ITER} iterations")


def _live(market: Market, p: np.ndarray):
    outcomes = np.flatnonzero(p > 0)
    X = market.price_relatives[outcomes]
    assets = np.flatnonzero(np.any(X > 0, axis=0))
    return outcomes, assets


def solve(market: Market, p, constraints: Optional[PortfolioConstraints] = None) -> SolveReport:
    """Maximise the growth rate of ``market`` under distribution ``p``.

    Deterministic: among several optimal portfolios the one reached from
    the uniform portfolio is returned; :func:`optimal_face` says whether
    others exist.
    """
    p = as_distribution(p, market.m)
    if constraints is not None:
        if constraints.k != market.k:
            raise MarketError(f"constraints are over {constraints.k} assets, market has {market.k}")
        return _solve_constrained(market, p, constraints)

    outcomes, assets = _live(market, p)
    X = market.price_relatives[np.ix_(outcomes, assets)]
    sub, iterations = _solve_simplex(X, p[outcomes])
    b = np.zeros(market.k)
    b[assets] = sub
    b = _frozen(b / b.sum())
    face = _face(market, p, b)
    return SolveReport(
        portfolio=b,
        growth=_expected_log(market.payoffs(b), p),
        kkt_residual=_residual(_gradient(market.price_relatives[outcomes], p[outcomes], b), b),
        iterations=iterations,
        unique=Uniqueness.UNIQUE if face.unique else Uniqueness.NON_UNIQUE,
    )


def maximize_growth(market: Market, p, E, f, G, h):
    """Maximise growth over ``{b : E b = f, G b <= h}`` (simplex rows included by caller).

    Returns ``(b, gap_bound, newton_steps)``.
    """
    live = np.flatnonzero(p > 0)
    X = market.price_relatives[live]
    w = p[live]
    x0, N, free = relative_interior(E, f, G, h, positive_rows=X)
    Gf, hf = G[free], h[free]

    def f0(x):
        r = X @ x
        if np.any(r <= 0):
            return None
        q = w / r
        return -float(w @ np.log(r)), -(X.T @ q), (X.T * (q / r)) @ X

    return barrier_minimize(x0, N, f0, linear_barrier(Gf, hf), n_constraints=len(free))


def _solve_constrained(market: Market, p: np.ndarray, constraints: PortfolioConstraints) -> SolveReport:
    k = market.k
    G = np.vstack([-np.eye(k), constraints.coefficients])
    h = np.concatenate([np.zeros(k), constraints.bounds])
    b, gap, steps = maximize_growth(market, p, np.ones((1, k)), [1.0], G, h)
    b = np.maximum(b, 0.0)
    b = _frozen(b / b.sum())
    return SolveReport(
        portfolio=b,
        growth=_expected_log(market.payoffs(b), p),
        kkt_residual=float(gap),
        iterations=steps,
        unique=Uniqueness.UNKNOWN,
    )


def _face(market: Market, p: np.ndarray, b: np.ndarray) -> OptimalFace:
    outcomes = np.flatnonzero(p > 0)
    X = market.price_relatives[outcomes]
    g = _gradient(X, p[outcomes], b)
    active = np.flatnonzero((np.abs(g - 1.0) <= FACE_TOL) | (b > 0))
    y = X @ b
    XA = X[:, active]
    system = np.vstack([XA, np.ones((1, active.size))])
    if np.linalg.matrix_rank(system) == active.size:
        unique = True
    else:
        unique = _face_is_point(XA, y)
    return OptimalFace(
        active=tuple(int(i) for i in active),
        unique=unique,
        portfolio=b,
        outcomes=_frozen(outcomes).astype(int),
        payoff=_frozen(y),
    )


def _face_is_point(XA: np.ndarray, y: np.ndarray, tol: float = 1e-9) -> bool:
    n = XA.shape[1]
    A_eq = np.vstack([XA, np.ones((1, n))])
    b_eq = np.concatenate([y, [1.0]])
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        lo = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
        hi = linprog(-c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
        if lo.status != 0 or hi.status != 0:
            continue
        if -hi.fun - lo.fun > tol:
            return False
    return True


def optimal_face(market: Market, p) -> OptimalFace:
    """Describe every growth-optimal portfolio for ``p``.

    An asset is active when its KKT equality holds at the computed
    optimum; the face is a single point when the active assets cannot be
    recombined without changing the payoff on the live outcomes.
    """
    p = as_distribution(p, market.m)
    report = solve(market, p)
    return _face(market, p, np.asarray(report.portfolio))


def max_growth(market: Market, p) -> float:
    """``F(p) = max_b W(b, p)``; always finite for a valid market."""
    g = solve(market, p).growth
    if g == NEG_INFINITY:
        raise InfeasibleError("maximal growth is -inf")
    return g
