import itertools

import numpy as np
import pytest

from mpaudit.capacity import capacity, rademacher_draw
from mpaudit.dataspace import gen_synthetic
from mpaudit.hypotheses import dictionary, exhaustive, trained


@pytest.fixture(scope="module")
def ds10():
    return gen_synthetic(10, 0.4, seed=1)


def dictionary_sup_oracle(sigma, m_d):
    """Exact sup correlation over all stored-ones patterns on the draw."""
    m = len(sigma)
    best = -1.0
    for k in range(min(m_d, m) + 1):
        for ones in itertools.combinations(range(m), k):
            h = np.zeros(m)
            h[list(ones)] = 1
            best = max(best, float(np.mean(sigma * (2 * h - 1))))
    return best


class TestRademacherDraw:
    def test_exhaustive_always_one(self, ds10):
        for seed in range(5):
            assert rademacher_draw(exhaustive(), ds10, 6, seed).achieved == 1.0

    def test_dictionary_closed_form_matches_enumeration(self, ds10):
        for m_d in (0, 1, 2, 4):
            for seed in range(10):
                draw = rademacher_draw(dictionary(m_d), ds10, 7, seed)
                oracle = dictionary_sup_oracle(np.array(draw.sigma), m_d)
                assert draw.achieved == pytest.approx(oracle, abs=1e-12)

    def test_trained_achieved_is_one_minus_two_err(self):
        ds = gen_synthetic(30, 0.3, seed=2)
        cls = trained("tree", max_depth=64, ccp_alpha=0.0)
        draw = rademacher_draw(cls, ds, 12, seed=4, restarts=1)
        # interpolating tree shatters the draw: zero sign errors -> 1
        assert draw.achieved == pytest.approx(1.0)

    def test_more_restarts_never_hurt(self):
        ds = gen_synthetic(30, 0.3, seed=2)
        cls = trained("linear", penalty="l2", C=1.0)
        for seed in range(5):
            a1 = rademacher_draw(cls, ds, 15, seed, restarts=1).achieved
            a3 = rademacher_draw(cls, ds, 15, seed, restarts=3).achieved
            assert a3 >= a1 - 1e-12

    def test_m_out_of_range(self, ds10):
        with pytest.raises(ValueError):
            rademacher_draw(exhaustive(), ds10, 11, 0)


class TestCapacity:
    def test_exhaustive_exact(self, ds10):
        est = capacity(exhaustive(), ds10, 20)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_single_hypothesis_is_zero_mean(self, ds10):
        est = capacity(dictionary(0), ds10, 2000, seed=5)
        assert abs(est.mean) <= 3 * est.stderr

    def test_monotone_in_memory(self, ds10):
        # common random numbers: same seed pairs the draws across classes
        means = [capacity(dictionary(m), ds10, 300, seed=9).mean
                 for m in (0, 2, 5, 10)]
        assert all(b >= a - 1e-12 for a, b in zip(means, means[1:]))

    def test_full_memory_dictionary_shatters(self, ds10):
        est = capacity(dictionary(10), ds10, 50, seed=3)
        assert est.mean == pytest.approx(1.0)

    def test_per_m_breakdown_covers_all_draws(self, ds10):
        est = capacity(dictionary(3), ds10, 100, seed=1)
        assert est.draws == 100
        assert set(est.per_m) <= set(range(1, 11))
        assert all(-1.0 <= v <= 1.0 for v in est.per_m.values())

    def test_deterministic(self, ds10):
        a = capacity(dictionary(3), ds10, 50, seed=2)
        b = capacity(dictionary(3), ds10, 50, seed=2)
        assert a == b
