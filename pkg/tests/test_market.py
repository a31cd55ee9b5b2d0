import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import dirichlet, log_growth, random_market, scalar_oracle
from logoptimal import (
    NEG_INFINITY,
    Market,
    MarketError,
    deduplicate_outcomes,
    empirical_distribution,
    growth_rate,
    wealth_trajectory,
)

# 0.75 ln 1.5 + 0.25 ln 0.5
KELLY_75 = 0.13081203594113694


class TestMarketValidation:
    def test_names_default(self):
        mk = Market(np.array([[1.0, 2.0], [1.0, 0.0]]))
        assert mk.asset_names == ("asset0", "asset1")
        assert mk.outcome_names == ("outcome0", "outcome1")
        assert (mk.m, mk.k) == (2, 2)

    @pytest.mark.parametrize(
        "x",
        [
            [[1.0, -0.1]],
            [[1.0, np.nan]],
            [[1.0, np.inf]],
            [[0.0, 0.0], [1.0, 1.0]],  # outcome with no surviving asset
            [[1.0, 0.0], [1.0, 0.0]],  # worthless asset
            np.zeros((0, 2)),
            [1.0, 2.0],
        ],
    )
    def test_rejects_invalid(self, x):
        with pytest.raises(MarketError):
            Market(np.asarray(x, dtype=float))

    def test_name_count_checked(self):
        with pytest.raises(MarketError):
            Market(np.ones((2, 2)), asset_names=("a",))

    def test_read_only(self):
        mk = Market(np.ones((2, 2)))
        with pytest.raises(ValueError):
            mk.price_relatives[0, 0] = 3.0

    def test_gambling(self):
        mk = Market.gambling([2.0, 3.0])
        assert np.array_equal(mk.price_relatives, [[2.0, 0.0], [0.0, 3.0]])


class TestGrowthRate:
    def test_safe_only(self):
        mk = Market(np.ones((3, 2)))
        assert growth_rate(mk, [0.3, 0.7], [0.2, 0.3, 0.5]) == 0.0

    def test_kelly_value(self):
        mk = Market.gambling([2.0, 2.0])
        assert growth_rate(mk, [0.75, 0.25], [0.75, 0.25]) == pytest.approx(KELLY_75, abs=1e-15)

    def test_kelly_value_is_grid_maximum(self):
        mk = Market.gambling([2.0, 2.0])
        p = np.array([0.75, 0.25])
        best, x = scalar_oracle(lambda f: log_growth(mk.price_relatives, np.array([f, 1 - f]), p))
        assert best == pytest.approx(KELLY_75, abs=1e-9)
        assert x == pytest.approx(0.75, abs=1e-6)

    def test_wiped_out(self):
        mk = Market(np.array([[1.0, 2.0], [1.0, 0.0]]))
        assert growth_rate(mk, [0.0, 1.0], [0.5, 0.5]) == NEG_INFINITY

    def test_zero_probability_outcome_ignored(self):
        mk = Market(np.array([[1.0, 2.0], [1.0, 0.0]]))
        assert growth_rate(mk, [0.0, 1.0], [1.0, 0.0]) == pytest.approx(math.log(2.0))

    def test_dimension_mismatch(self):
        mk = Market(np.ones((2, 2)))
        with pytest.raises(MarketError):
            growth_rate(mk, [1.0], [0.5, 0.5])
        with pytest.raises(MarketError):
            growth_rate(mk, [0.5, 0.5], [1.0])

    def test_not_a_distribution(self):
        mk = Market(np.ones((2, 2)))
        with pytest.raises(MarketError):
            growth_rate(mk, [0.5, 0.5], [0.6, 0.6])


class TestWealth:
    def test_empty(self):
        mk = Market(np.ones((2, 1)))
        assert wealth_trajectory(mk, [1.0], []).size == 0

    def test_safe_asset(self):
        mk = Market(np.array([[1.0, 2.0], [1.0, 0.0]]))
        assert np.array_equal(wealth_trajectory(mk, [1.0, 0.0], [0, 1, 1, 0]), np.ones(4))

    def test_hand_example(self):
        mk = Market(np.array([[1.0, 2.0], [1.0, 0.0]]))
        assert np.allclose(wealth_trajectory(mk, [0.5, 0.5], [0, 0, 1]), [1.5, 2.25, 1.125], rtol=0, atol=1e-15)

    def test_index_out_of_range(self):
        mk = Market(np.ones((2, 1)))
        with pytest.raises(MarketError):
            wealth_trajectory(mk, [1.0], [0, 2])


class TestEmpirical:
    @pytest.mark.parametrize(
        "seq, m, expected",
        [((0, 0, 1), 2, (2 / 3, 1 / 3)), ((1,), 3, (0, 1, 0)), ((0, 1, 0, 1), 2, (0.5, 0.5))],
    )
    def test_counts(self, seq, m, expected):
        assert np.allclose(empirical_distribution(seq, m), expected, atol=1e-15)

    def test_empty(self):
        with pytest.raises(MarketError):
            empirical_distribution([], 2)

    def test_out_of_range(self):
        with pytest.raises(MarketError):
            empirical_distribution([0, 3], 3)


def test_deduplicate_merges_mass():
    mk = Market(np.array([[1.0, 2.0], [1.0, 0.0], [1.0, 2.0]]), outcome_names=("a", "b", "c"))
    reduced, groups, p = deduplicate_outcomes(mk, [0.2, 0.3, 0.5])
    assert reduced.outcome_names == ("a", "b")
    assert list(groups) == [0, 1, 0]
    assert np.allclose(p, [0.7, 0.3])


seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


@settings(max_examples=200, deadline=None)
@given(seeds, dims, dims)
def test_concave_in_portfolio(seed, m, k):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k)
    p, b1, b2 = dirichlet(rng, m), dirichlet(rng, k), dirichlet(rng, k)
    mid = growth_rate(mk, (b1 + b2) / 2, p)
    w1, w2 = growth_rate(mk, b1, p), growth_rate(mk, b2, p)
    if math.isinf(w1) or math.isinf(w2):
        return
    assert mid >= (w1 + w2) / 2 - 1e-12


@settings(max_examples=200, deadline=None)
@given(seeds, dims, dims, st.floats(0.0, 1.0))
def test_affine_in_distribution(seed, m, k, t):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k, zero_prob=0.0)
    b, p1, p2 = dirichlet(rng, k), dirichlet(rng, m), dirichlet(rng, m)
    mix = t * p1 + (1 - t) * p2
    mix = mix / mix.sum()
    lhs = growth_rate(mk, b, mix)
    rhs = t * growth_rate(mk, b, p1) + (1 - t) * growth_rate(mk, b, p2)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds, dims, dims, st.integers(1, 60))
def test_final_wealth_matches_empirical_growth(seed, m, k, n):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k)
    b = dirichlet(rng, k)
    outcomes = rng.integers(0, m, size=n)
    s = wealth_trajectory(mk, b, outcomes)
    if s[-1] <= 0:
        assert growth_rate(mk, b, empirical_distribution(outcomes, m)) == NEG_INFINITY
        return
    w = growth_rate(mk, b, empirical_distribution(outcomes, m))
    assert math.exp(n * w) == pytest.approx(s[-1], rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(seeds, dims, dims)
def test_growth_matches_direct_loop(seed, m, k):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k)
    b, p = dirichlet(rng, k), dirichlet(rng, m)
    p[rng.random(m) < 0.3] = 0.0
    if p.sum() == 0:
        return
    p = p / p.sum()
    expected = log_growth(mk.price_relatives, b, p)
    got = growth_rate(mk, b, p)
    if math.isinf(expected):
        assert got == NEG_INFINITY
    else:
        assert got == pytest.approx(expected, abs=1e-12)
