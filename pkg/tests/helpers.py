"""Generators and solver-independent oracles shared by the test modules."""

import itertools

import numpy as np

from logoptimal import Market


def dirichlet(rng, n, alpha=1.0):
    p = rng.dirichlet(np.full(n, alpha))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def random_market(rng, m, k, zero_prob=0.2, high=2.0):
    """Random valid market; some entries are zero so wipe-outs occur."""
    while True:
        x = rng.uniform(0.0, high, size=(m, k))
        x[rng.random((m, k)) < zero_prob] = 0.0
        if np.all(x.max(axis=1) > 0) and np.all(x.max(axis=0) > 0):
            return Market(x)


def random_kelly(rng, m, low=0.2, high=10.0):
    return Market.gambling(rng.uniform(low, high, size=m))


def log_growth(X, b, p):
    """Direct evaluation of sum p_j ln <X_j, b> with the 0 ln 0 = 0 convention."""
    total = 0.0
    for j in range(X.shape[0]):
        if p[j] == 0:
            continue
        r = float(np.dot(X[j], b))
        if r <= 0:
            return -np.inf
        total += p[j] * np.log(r)
    return total


def _lattice(center, step, radius, k):
    """Simplex points ``center + step * z`` with integer ``|z_i| <= radius`` on the first k-1 coordinates."""
    pts = []
    for z in itertools.product(range(-radius, radius + 1), repeat=k - 1):
        head = center[:-1] + step * np.array(z, dtype=float)
        last = 1.0 - head.sum()
        b = np.append(head, last)
        if np.all(b >= -1e-12):
            pts.append(np.clip(b, 0.0, None))
    return pts


def grid_oracle(X, p, rounds=3):
    """Brute-force max of the growth rate: a coarse simplex grid, then `rounds` tenfold refinements."""
    X = np.asarray(X, dtype=float)
    k = X.shape[1]
    if k == 1:
        return log_growth(X, np.ones(1), p), np.ones(1)
    n = 100
    coarse = [np.array(c, dtype=float) / n for c in itertools.product(range(n + 1), repeat=k - 1) if sum(c) <= n]
    candidates = [np.append(c, 1.0 - c.sum()) for c in coarse]
    best = max(candidates, key=lambda b: log_growth(X, b, p))
    step = 1.0 / n
    for _ in range(rounds):
        step /= 10.0
        best = max(_lattice(best, step, 10, k), key=lambda b: log_growth(X, b, p))
    return log_growth(X, best, p), best


def scalar_oracle(f, lo=0.0, hi=1.0, rounds=6, n=200):
    """Maximise a concave scalar function by repeated grid refinement."""
    for _ in range(rounds):
        xs = np.linspace(lo, hi, n + 1)
        vals = [f(x) for x in xs]
        i = int(np.argmax(vals))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n)]
    x = 0.5 * (lo + hi)
    return f(x), x
