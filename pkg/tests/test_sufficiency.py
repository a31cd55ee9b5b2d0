import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_kelly, random_market
from logoptimal import (
    Market,
    characterization_crosscheck,
    distribution_regret,
    injectivity_test,
    kl_divergence,
    proportionality_test,
)
from logoptimal.sufficiency import shared_optimum_partner

DOUBLE_OR_NOTHING = np.array([[1.0, 2.0], [1.0, 0.0]])


class TestProportionality:
    def test_kelly(self):
        v = proportionality_test(Market(np.array([[2.0, 0.0], [0.0, 3.0]])))
        assert v.proportional
        assert v.constant_c == pytest.approx(1.0, abs=1e-8)
        assert v.counterexample is None

    def test_double_or_nothing(self):
        v = proportionality_test(Market(DOUBLE_OR_NOTHING))
        assert not v.proportional
        ce = v.counterexample
        assert ce is not None
        assert ce.predicted is None or abs(ce.regret - ce.predicted) > 1e-7 * (1 + ce.divergence)
        assert distribution_regret(Market(DOUBLE_OR_NOTHING), ce.p, ce.q) == pytest.approx(ce.regret, abs=1e-12)

    def test_single_outcome(self):
        v = proportionality_test(Market(np.array([[1.0, 2.0]])))
        assert v.degenerate and not v.proportional and v.constant_c is None

    def test_duplicate_rows_reduce_to_one(self):
        v = proportionality_test(Market(np.array([[1.0, 2.0], [1.0, 2.0]])))
        assert v.degenerate

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        mk = random_market(rng, 4, 3)
        a = proportionality_test(mk, seed=7)
        b = proportionality_test(mk, seed=7)
        assert a.proportional == b.proportional and a.samples_tested == b.samples_tested
        if a.counterexample is not None:
            assert np.array_equal(a.counterexample.p, b.counterexample.p)

    def test_non_kelly_found_away_from_partner_search(self):
        # a non-Kelly market whose optimal portfolios are all distinct still fails on some sampled pair
        x = np.array([[2.0, 0.0, 1.2], [0.0, 2.0, 1.2], [1.0, 1.0, 0.1]])
        v = proportionality_test(Market(x))
        assert not v.proportional


class TestPartner:
    def test_partner_shares_optimum(self):
        mk = Market(DOUBLE_OR_NOTHING)
        q = np.array([0.3, 0.7])
        p = shared_optimum_partner(mk, q)
        assert p is not None
        assert np.max(np.abs(p - q)) > 1e-6
        assert distribution_regret(mk, p, q) <= 1e-9

    def test_kelly_has_no_partner(self):
        assert shared_optimum_partner(Market.gambling([2.0, 3.0, 4.0]), np.array([0.2, 0.3, 0.5])) is None


class TestInjectivity:
    def test_kelly(self):
        res = injectivity_test(Market.gambling([2.0, 3.0, 1.5]))
        assert res.injective and res.witness is None and res.equivalence_applies

    def test_safe_dominant(self):
        mk = Market(np.array([[1.0, 0.5], [1.0, 0.9]]))
        res = injectivity_test(mk)
        assert not res.injective
        p, q = res.witness
        assert np.max(np.abs(p - q)) > 1e-6
        assert distribution_regret(mk, p, q) <= 1e-9
        assert not res.equivalence_applies

    def test_double_or_nothing(self):
        mk = Market(DOUBLE_OR_NOTHING)
        res = injectivity_test(mk)
        assert not res.injective
        p, q = res.witness
        assert distribution_regret(mk, p, q) <= 1e-9 and kl_divergence(p, q) > 0


class TestCrosscheck:
    def test_kelly_plus_dominated(self):
        cc = characterization_crosscheck(Market(np.array([[2.0, 0.0, 0.1], [0.0, 3.0, 0.1]])))
        assert cc.agree and cc.verdict.proportional
        assert np.allclose(cc.kelly_odds, [2.0, 3.0])

    def test_non_kelly(self):
        cc = characterization_crosscheck(Market(DOUBLE_OR_NOTHING))
        assert cc.agree and not cc.verdict.proportional and cc.kelly_odds is None

    def test_degenerate_agrees(self):
        cc = characterization_crosscheck(Market(np.array([[1.0, 2.0]])))
        assert cc.agree


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 5))
def test_kelly_constant_is_one(seed, m):
    rng = np.random.default_rng(seed)
    v = proportionality_test(random_kelly(rng, m), sample_count=30, seed=seed % 1000)
    assert v.proportional
    assert v.constant_c == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(2, 4), st.floats(0.1, 10.0))
def test_invariant_under_permutation_and_scaling(seed, m, scale):
    rng = np.random.default_rng(seed)
    mk = random_kelly(rng, m)
    rows, cols = rng.permutation(m), rng.permutation(m)
    permuted = Market(mk.price_relatives[np.ix_(rows, cols)] * scale)
    a = proportionality_test(mk, sample_count=30)
    b = proportionality_test(permuted, sample_count=30)
    assert a.proportional and b.proportional
    assert b.constant_c == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=10, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(2, 4))
def test_permutation_keeps_negative_verdict(seed, m, k):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k)
    a = characterization_crosscheck(mk, sample_count=30)
    permuted = Market(mk.price_relatives[np.ix_(rng.permutation(m), rng.permutation(k))])
    b = characterization_crosscheck(permuted, sample_count=30)
    assert a.agree and b.agree
    assert (a.kelly_odds is None) == (b.kelly_odds is None)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(2, 5), st.integers(2, 5))
def test_regret_never_exceeds_divergence_in_counterexample(seed, m, k):
    rng = np.random.default_rng(seed)
    mk = random_market(rng, m, k)
    v = proportionality_test(mk, sample_count=20)
    if v.counterexample is not None:
        ce = v.counterexample
        assert ce.regret <= ce.divergence + 1e-9
