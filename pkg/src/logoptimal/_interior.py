"""Log-barrier interior point machinery shared by the constrained solvers.

Problems have the form ``minimize f0(x)`` over ``{E x = f, G x <= h}`` plus
whatever smooth convex constraints the caller folds into its own barrier
term. Everything here is small and dense.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .errors import ConvergenceError, InfeasibleError

# value, gradient, hessian; None when x is outside the domain
Oracle = Callable[[np.ndarray], Optional[tuple[float, np.ndarray, np.ndarray]]]

IMPLICIT_TOL = 1e-9


class ZeroObjectiveRow(InfeasibleError):
    """A row required to be positive vanishes on the whole feasible set."""

    def __init__(self, row: int):
        super().__init__(f"row {row} is zero on the entire feasible set")
        self.row = row


def _lp(c, G, h, E, f):
    n = len(c)
    res = linprog(
        c,
        A_ub=G if G.size else None,
        b_ub=h if G.size else None,
        A_eq=E if E.size else None,
        b_eq=f if E.size else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    if res.status == 2:
        raise InfeasibleError("constraint set is empty")
    if res.status != 0:
        raise InfeasibleError(f"linear program failed: {res.message}")
    return res


def relative_interior(E, f, G, h, positive_rows=None):
    """Locate a relative-interior point of ``{E x = f, G x <= h}``.

    Inequalities that are tight on the whole set are promoted to
    equalities. Rows of ``positive_rows`` must be strictly positive
    somewhere on the set, otherwise :class:`ZeroObjectiveRow` is raised.

    Returns ``(x0, N, free)``: the point, an orthonormal basis of the
    directions of the affine hull, and the indices of inequality rows that
    keep a barrier term.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    E = np.asarray(E, dtype=float).reshape(-1, G.shape[1])
    f = np.asarray(f, dtype=float).ravel()
    n = G.shape[1]

    points = []
    tight = []
    for i in range(G.shape[0]):
        res = _lp(G[i], G, h, E, f)
        if h[i] - res.fun > IMPLICIT_TOL:
            points.append(res.x)
        else:
            tight.append(i)
    if positive_rows is not None:
        for j, row in enumerate(np.atleast_2d(positive_rows)):
            res = _lp(-row, G, h, E, f)
            if -res.fun <= IMPLICIT_TOL:
                raise ZeroObjectiveRow(j)
            points.append(res.x)
    if not points:
        points.append(_lp(np.zeros(n), G, h, E, f).x)
    x0 = np.mean(points, axis=0)

    Eaug = np.vstack([E, G[tight]])
    faug = np.concatenate([f, h[tight]])
    if Eaug.shape[0]:
        x0 = x0 - np.linalg.pinv(Eaug) @ (Eaug @ x0 - faug)
        N = null_space(Eaug)
    else:
        N = np.eye(n)
    free = np.array([i for i in range(G.shape[0]) if i not in set(tight)], dtype=int)
    return x0, N, free


def linear_barrier(G, h) -> Oracle:
    """``-sum log(h - G x)`` with its derivatives."""
    G = np.atleast_2d(G)

    def oracle(x):
        s = h - G @ x
        if np.any(s <= 0):
            return None
        inv = 1.0 / s
        return -np.sum(np.log(s)), G.T @ inv, (G.T * inv**2) @ G

    return oracle


def barrier_minimize(
    x0: np.ndarray,
    N: np.ndarray,
    f0: Oracle,
    barrier: Oracle,
    n_constraints: int,
    gap_tol: float = 1e-11,
    tau0: float = 1.0,
    mu: float = 20.0,
    max_newton: int = 100000,
):
    """Path-following barrier method on the affine set ``x0 + span(N)``.

    Minimises ``f0 + barrier / tau`` for increasing ``tau``; the final
    suboptimality is at most ``n_constraints / tau``.

    Returns ``(x, gap_bound, newton_steps)``.
    """
    if N.shape[1] == 0:
        return x0.copy(), 0.0, 0

    def psi(z, tau, derivs=True):
        x = x0 + N @ z
        a = f0(x)
        if a is None:
            return None
        c = barrier(x)
        if c is None:
            return None
        val = a[0] + c[0] / tau
        if not derivs:
            return val
        g = N.T @ (a[1] + c[1] / tau)
        H = N.T @ (a[2] + c[2] / tau) @ N
        return val, g, H

    if psi(np.zeros(N.shape[1]), tau0, derivs=False) is None:
        raise InfeasibleError("starting point is outside the domain")

    z = np.zeros(N.shape[1])
    tau = tau0
    steps = 0
    while True:
        for _ in range(200):
            val, g, H = psi(z, tau)
            try:
                d = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                d = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = -g @ d
            steps += 1
            if steps > max_newton:
                raise ConvergenceError("no convergence in barrier method")
            if not np.isfinite(dec) or dec <= 2e-16:
                break
            t = 1.0
            while True:
                new = psi(z + t * d, tau, derivs=False)
                if new is not None and new <= val - 0.25 * t * dec:
                    break
                t *= 0.5
                if t < 1e-14:
                    break
            if t < 1e-14:
                break
            z = z + t * d
            if dec < 1e-14:
                break
        if n_constraints / tau < gap_tol:
            break
        tau *= mu
    return x0 + N @ z, n_constraints / tau, steps
