import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpaudit.audit import random_audit
from mpaudit.dataspace import gen_synthetic
from mpaudit.diameter import (ReductionConfig, benign_overfitting_lower_bound,
                              diam_bruteforce, diam_dictionary_closed_form,
                              diam_empirical, diam_exhaustive_closed_form,
                              optimal_dictionary_audit)
from mpaudit.harness import proportional_dictionary
from mpaudit.hypotheses import dictionary, exhaustive, trained
from mpaudit.metrics import fit_star


@pytest.fixture(scope="module")
def ds8():
    return gen_synthetic(8, 0.375, seed=3)


class TestClosedForms:
    @given(st.integers(0, 255), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_exhaustive_matches_bruteforce(self, s_bits, seed):
        ds = gen_synthetic(8, 0.375, seed=3)
        S = [i for i in range(8) if s_bits >> i & 1]
        h_star = np.random.default_rng(seed).integers(0, 2, 8).astype(np.int8)
        brute = diam_bruteforce(exhaustive(), h_star, S, ds)
        closed = diam_exhaustive_closed_form(S, ds)
        assert closed == pytest.approx(brute.value, abs=1e-12)

    @given(st.integers(0, 255), st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_dictionary_matches_bruteforce(self, s_bits, m, seed):
        ds = gen_synthetic(8, 0.375, seed=3)
        S = [i for i in range(8) if s_bits >> i & 1]
        rng = np.random.default_rng(seed)
        d_star = np.zeros(8, dtype=np.int8)
        d_star[rng.choice(8, size=rng.integers(0, m + 1), replace=False)] = 1
        brute = diam_bruteforce(dictionary(m), d_star, S, ds)
        closed = diam_dictionary_closed_form(d_star, m, S, ds)
        assert closed == pytest.approx(brute.value, abs=1e-12)

    def test_full_audit_gives_zero(self, ds8):
        assert diam_exhaustive_closed_form(range(8), ds8) == pytest.approx(0.0)

    def test_empty_audit_gives_two(self, ds8):
        assert diam_exhaustive_closed_form([], ds8) == pytest.approx(2.0)

    def test_oversized_dictionary_rejected(self, ds8):
        with pytest.raises(ValueError):
            diam_dictionary_closed_form(np.ones(8, dtype=np.int8), 2, [], ds8)

    def test_bruteforce_witnesses_attain_value(self, ds8):
        from mpaudit.dataspace import measure_mu
        h_star = np.zeros(8, dtype=np.int8)
        res = diam_bruteforce(exhaustive(), h_star, [0, 1], ds8)
        up = measure_mu(res.h_up, range(8), ds8)
        down = measure_mu(res.h_down, range(8), ds8)
        assert up - down == pytest.approx(res.value)


class TestBenignBound:
    def test_never_exceeds_exhaustive_diameter(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(4, 11))
            ds = gen_synthetic(n, 0.5 if n < 6 else 0.4, seed=int(rng.integers(1000)))
            S = list(rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
            h_star = rng.integers(0, 2, n).astype(np.int8)
            bound = benign_overfitting_lower_bound(S, 0.0, ds)
            diam = diam_bruteforce(exhaustive(), h_star, S, ds).value
            assert bound <= diam + 1e-12

    def test_balanced_groups_identity(self):
        ds = gen_synthetic(8, 0.5, seed=1)
        for size in range(9):
            S = list(range(size))
            assert benign_overfitting_lower_bound(S, 0.0, ds) == pytest.approx(0.0, abs=1e-15)

    def test_epsilon_fit_range(self, ds8):
        with pytest.raises(ValueError):
            benign_overfitting_lower_bound([], 1.0, ds8)


class TestEmpirical:
    def test_certified_matches_closed_form_for_interpolating_trees(self):
        ds = gen_synthetic(120, 0.3, seed=2)
        cls = trained("tree", max_depth=128, ccp_alpha=0.0)
        h_star = fit_star(cls, ds, ds.labels)
        audit = random_audit(ds, 0.1, 0.1, seed=0)
        res = diam_empirical(cls, h_star, audit.queries, ds, ReductionConfig(trainer=cls))
        closed = diam_exhaustive_closed_form(audit.queries, ds)
        assert res.certified
        assert res.value == pytest.approx(closed, rel=1e-9)

    def test_never_exceeds_enclosing_closed_form(self):
        ds = gen_synthetic(80, 0.3, seed=5)
        cls = trained("tree", max_depth=2, ccp_alpha=0.0)
        h_star = fit_star(cls, ds, ds.labels)
        audit = random_audit(ds, 0.2, 0.2, seed=1)
        res = diam_empirical(cls, h_star, audit.queries, ds, ReductionConfig(trainer=cls))
        if res.certified:
            assert res.value <= diam_exhaustive_closed_form(audit.queries, ds) + 1e-9

    def test_value_is_nonnegative_even_for_weak_families(self):
        # a perceptron often cannot realize either directional target;
        # the reported lower bound must still respect diameter >= 0
        ds = gen_synthetic(80, 0.3, seed=7)
        cls = trained("perceptron", penalty="l2", alpha=1e-5)
        h_star = fit_star(cls, ds, ds.labels)
        for seed in range(3):
            audit = random_audit(ds, 0.2, 0.2, seed=seed)
            res = diam_empirical(cls, h_star, audit.queries, ds,
                                 ReductionConfig(trainer=cls))
            assert res.value >= 0.0

    def test_requires_config(self):
        ds = gen_synthetic(10, 0.4, seed=0)
        with pytest.raises(ValueError):
            diam_empirical(trained("linear"), np.zeros(10, dtype=np.int8), [], ds)


class TestOptimalDictionaryAudit:
    def test_memory_zero_is_zero(self):
        ds = gen_synthetic(100, 0.3, seed=0)
        val, comp = optimal_dictionary_audit(0, 10, ds, (0, 0))
        assert val == pytest.approx(0.0)
        # no stored entries to find: the whole budget lands on zero cells
        assert comp == (0, 3, 0, 7)

    def test_zero_budget_equals_unaudited_closed_form(self):
        ds = gen_synthetic(100, 0.3, seed=0)
        d_star, ones = proportional_dictionary(ds, 20)
        val, _ = optimal_dictionary_audit(20, 0, ds, ones)
        assert val == pytest.approx(diam_dictionary_closed_form(d_star, 20, [], ds))

    def test_lower_bounds_random_draws(self):
        ds = gen_synthetic(100, 0.3, seed=0)
        m, budget = 30, 20
        d_star, ones = proportional_dictionary(ds, m)
        opt, _ = optimal_dictionary_audit(m, budget, ds, ones)
        beta = budget / ds.n
        for seed in range(20):
            audit = random_audit(ds, beta, beta, seed)
            rnd = diam_dictionary_closed_form(d_star, m, audit.queries, ds)
            assert opt <= rnd + 1e-12

    def test_witness_composition_is_feasible(self):
        ds = gen_synthetic(100, 0.3, seed=0)
        _, (a, b, c, e) = optimal_dictionary_audit(40, 50, ds, (12, 28))
        assert a + b == int(0.5 * ds.nA)
        assert c + e == int(0.5 * ds.nNotA)
        assert a <= 12 and c <= 28

    def test_infeasible_placement_rejected(self):
        ds = gen_synthetic(100, 0.3, seed=0)
        with pytest.raises(ValueError):
            optimal_dictionary_audit(5, 10, ds, (4, 4))
