"""Is the market's regret proportional to information divergence?

Only Kelly gambling markets (after removing dominated assets and merging
identical outcomes) have regret ``c * D(p || q)``, and then ``c = 1``.
These checks are empirical: they sample distribution pairs from a seeded
generator and look for a pair that breaks proportionality. Besides random
interior pairs they probe near the simplex boundary and, most
effectively, search for two different distributions that share a
log-optimal portfolio, which gives zero regret against positive
divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import linprog

from .divergence import distribution_regret, kl_divergence
from .gambling import is_kelly_market
from .logopt import solve
from .market import Market, deduplicate_outcomes

REL_TOL = 1e-7
ZERO_REGRET = 1e-9
SEPARATION = 1e-6


@dataclass(frozen=True)
class Counterexample:
    p: np.ndarray
    q: np.ndarray
    regret: float
    divergence: float
    predicted: Optional[float]  # c * divergence; None when no positive c could be fitted


@dataclass(frozen=True)
class ProportionalityVerdict:
    proportional: bool
    constant_c: Optional[float]
    counterexample: Optional[Counterexample]
    samples_tested: int
    degenerate: bool = False


def _reference_pair(m: int):
    p0 = np.full(m, 1.0 / m)
    q0 = np.arange(1, m + 1, dtype=float)
    return p0, q0 / q0.sum()


def _sanitize(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _boundary_heavy(rng, m: int) -> np.ndarray:
    j = rng.integers(m)
    p = 0.01 * rng.dirichlet(np.ones(m))
    p[j] += 0.99
    return _sanitize(p)


def _sample_pairs(rng, m: int, count: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    for n in range(count):
        kind = n % 3
        if kind == 0:
            yield _sanitize(rng.dirichlet(np.ones(m))), _sanitize(rng.dirichlet(np.ones(m)))
        elif kind == 1:
            yield _boundary_heavy(rng, m), _sanitize(rng.dirichlet(np.ones(m)))
        else:
            yield _boundary_heavy(rng, m), _boundary_heavy(rng, m)


def _probe_distributions(rng, m: int, count: int) -> list[np.ndarray]:
    probes = [np.full(m, 1.0 / m)]
    probes += [_sanitize(np.eye(m)[j] * 0.98 + 0.02 / m) for j in range(m)]
    probes += list(np.eye(m))
    probes += [_sanitize(rng.dirichlet(np.ones(m))) for _ in range(count)]
    return probes


def shared_optimum_partner(market: Market, q) -> Optional[np.ndarray]:
    """A distribution far from ``q`` for which ``q``'s optimal portfolio stays optimal.

    For fixed ``b`` the optimality conditions are linear in the
    distribution, so the set of such partners is a polytope; its vertex
    farthest from ``q`` in one coordinate is returned when it is more than
    ``SEPARATION`` away.
    """
    q = np.asarray(q, dtype=float)
    b = np.asarray(solve(market, q).portfolio)
    X = market.price_relatives
    m = market.m
    y = X @ b
    dead = y <= 0
    ratio = np.zeros_like(X)
    ratio[~dead] = X[~dead] / y[~dead, None]
    bounds = [(0.0, 0.0) if dead[j] else (0.0, None) for j in range(m)]
    best, best_dist = None, SEPARATION
    # any partner other than q puts more mass than q on some outcome
    for j in range(m):
        c = np.zeros(m)
        c[j] = -1.0
        res = linprog(c, A_ub=ratio.T, b_ub=np.ones(market.k), A_eq=np.ones((1, m)), b_eq=[1.0],
                      bounds=bounds, method="highs")
        if res.status != 0:
            continue
        p = _sanitize(res.x)
        dist = float(np.max(np.abs(p - q)))
        if dist > best_dist:
            best, best_dist = p, dist
    return best


def proportionality_test(market: Market, sample_count: int = 100, seed: int = 0, tol: float = REL_TOL) -> ProportionalityVerdict:
    """Fit ``c`` on a fixed reference pair, then hunt for a pair violating ``regret = c D``.

    Identical outcome rows are merged first. A violation means
    ``|regret - c D| > tol (1 + D)``.
    """
    reduced = deduplicate_outcomes(market)[0]
    m = reduced.m
    if m < 2:
        return ProportionalityVerdict(False, None, None, 0, degenerate=True)
    rng = np.random.default_rng(seed)

    p0, q0 = _reference_pair(m)
    d0 = kl_divergence(p0, q0)
    r0 = distribution_regret(reduced, p0, q0)
    c = r0 / d0
    tested = 1
    if c <= tol:
        return ProportionalityVerdict(False, None, Counterexample(p0, q0, r0, d0, None), tested)

    def check(p, q):
        d = kl_divergence(p, q)
        r = distribution_regret(reduced, p, q)
        if np.isinf(d) and np.isinf(r):
            return None
        if np.isinf(d) or np.isinf(r) or abs(r - c * d) > tol * (1.0 + d):
            return Counterexample(p, q, r, d, c * d)
        return None

    # pairs sharing an optimal portfolio first: the cheapest way to expose a non-Kelly market
    for q in _probe_distributions(rng, m, max(2, sample_count // 25)):
        partner = shared_optimum_partner(reduced, q)
        if partner is None:
            continue
        tested += 1
        found = check(partner, q)
        if found is not None:
            return ProportionalityVerdict(False, c, found, tested)

    for p, q in _sample_pairs(rng, m, sample_count):
        tested += 1
        found = check(p, q)
        if found is not None:
            return ProportionalityVerdict(False, c, found, tested)
    return ProportionalityVerdict(True, c, None, tested)


@dataclass(frozen=True)
class InjectivityResult:
    injective: bool
    witness: Optional[tuple[np.ndarray, np.ndarray]]
    distinct_outcomes: int

    @property
    def equivalence_applies(self) -> bool:
        """Injectivity characterises proportional regret only with three or more distinct outcomes."""
        return self.distinct_outcomes >= 3


def injectivity_test(market: Market, sample_count: int = 100, seed: int = 0) -> InjectivityResult:
    """Search for ``p != q`` with zero regret of acting on ``q`` under ``p``."""
    reduced = deduplicate_outcomes(market)[0]
    m = reduced.m
    rng = np.random.default_rng(seed)
    if m >= 2:
        for q in _probe_distributions(rng, m, sample_count):
            partner = shared_optimum_partner(reduced, q)
            if partner is None:
                continue
            if distribution_regret(reduced, partner, q) <= ZERO_REGRET:
                return InjectivityResult(False, (partner, q), m)
    return InjectivityResult(True, None, m)


@dataclass(frozen=True)
class Crosscheck:
    agree: bool
    verdict: ProportionalityVerdict
    kelly_odds: Optional[np.ndarray]


def characterization_crosscheck(market: Market, seed: int = 0, sample_count: int = 100) -> Crosscheck:
    """Compare the sampled proportionality verdict with the structural Kelly test.

    A degenerate single-outcome market counts as (vacuously) proportional.
    """
    reduced = deduplicate_outcomes(market)[0]
    verdict = proportionality_test(reduced, sample_count=sample_count, seed=seed)
    odds = is_kelly_market(reduced)
    proportional = verdict.proportional or verdict.degenerate
    return Crosscheck(agree=proportional == (odds is not None), verdict=verdict, kelly_odds=odds)
