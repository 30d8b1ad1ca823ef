import numpy as np
import pytest

from mpaudit.audit import random_audit
from mpaudit.dataspace import Dataset, SamplePoint, gen_synthetic
from mpaudit.diameter import diam_exhaustive_closed_form
from mpaudit.hypotheses import ModelFamily, dictionary, exhaustive, trained
from mpaudit.metrics import (cost_of_exhaustion, cv_accuracies, fit_star,
                             manipulability, select_h_opt, stratified_folds)


@pytest.fixture(scope="module")
def ds():
    return gen_synthetic(60, 0.3, seed=0)


def noisy_threshold_dataset(n=120, flip=0.2, seed=4):
    """1-D threshold task with injected label noise.

    A depth-2 tree is essentially Bayes-optimal; an unpruned deep tree
    memorizes the flipped labels and generalizes worse.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, n)
    y = (x > 0).astype(np.int8)
    noise = rng.random(n) < flip
    y[noise] ^= 1
    sens = (rng.random(n) < 0.5).astype(np.int8)
    sens[0], sens[1] = 0, 1
    points = [SamplePoint(i, (float(x[i]),), int(sens[i]), int(y[i]))
              for i in range(n)]
    return Dataset(points, ["x"])


class TestFitStar:
    def test_exhaustive_memorizes(self, ds):
        h = fit_star(exhaustive(), ds, ds.labels)
        assert np.array_equal(h, ds.labels)

    def test_dictionary_truncates_by_lowest_id(self, ds):
        h = fit_star(dictionary(3), ds, ds.labels)
        ones = np.flatnonzero(h == 1)
        expected = np.flatnonzero(ds.labels == 1)[:3]
        assert np.array_equal(ones, expected)

    def test_off_train_default_is_zero(self, ds):
        h = fit_star(exhaustive(), ds, ds.labels, train_ids=np.arange(10))
        assert not h[10:].any()


class TestManipulability:
    def test_exhaustive_matches_closed_form_expectation(self, ds):
        est = manipulability(exhaustive(), ds, 0.1, reps=5, seed=3)
        expected = []
        for r in range(5):
            audit_seed = int(np.random.default_rng((3, r)).integers(0, 2 ** 63))
            audit = random_audit(ds, 0.1, 0.1, audit_seed)
            expected.append(diam_exhaustive_closed_form(audit.queries, ds))
        assert est.mean == pytest.approx(np.mean(expected), abs=1e-12)
        assert est.diam_kind == "closed_form"

    def test_singleton_class_is_zero(self, ds):
        est = manipulability(dictionary(0), ds, 0.1, reps=3)
        assert est.mean == pytest.approx(0.0)

    def test_monotone_in_memory_paired(self, ds):
        means = [manipulability(dictionary(m), ds, 0.1, reps=5, seed=1).mean
                 for m in (0, 5, 20, 60)]
        assert all(b >= a - 1e-12 for a, b in zip(means, means[1:]))

    def test_trained_uses_empirical_method(self, ds):
        cls = trained("tree", max_depth=4, ccp_alpha=0.0)
        est = manipulability(cls, ds, 0.1, reps=2, seed=0)
        assert est.diam_kind == "empirical"
        assert 0 <= est.mean <= 2

    def test_closed_form_refused_for_trained(self, ds):
        with pytest.raises(ValueError):
            manipulability(trained("linear"), ds, 0.1, 1, diam_method="closed_form")


class TestFolds:
    def test_partition(self, ds):
        folds = stratified_folds(ds, 5, seed=2)
        assert folds.shape == (ds.n,)
        assert set(folds) == set(range(5))

    def test_strata_spread_evenly(self, ds):
        folds = stratified_folds(ds, 5, seed=2)
        strata = ds.labels.astype(int) * 2 + ds.sensitive.astype(int)
        for s in np.unique(strata):
            counts = np.bincount(folds[strata == s], minlength=5)
            assert counts.max() - counts.min() <= 1

    def test_deterministic_in_seed(self, ds):
        assert np.array_equal(stratified_folds(ds, 5, 1), stratified_folds(ds, 5, 1))
        assert not np.array_equal(stratified_folds(ds, 5, 1), stratified_folds(ds, 5, 2))


class TestSelection:
    def test_single_class_family(self, ds):
        fam = ModelFamily("tree", (trained("tree", max_depth=2, ccp_alpha=0.0),))
        assert select_h_opt(fam, ds) == fam.grid[0]

    def test_generalizer_beats_overfitter(self):
        noisy = noisy_threshold_dataset()
        shallow = trained("tree", max_depth=2, ccp_alpha=0.0)
        deep = trained("tree", max_depth=128, ccp_alpha=0.0)
        fam = ModelFamily("tree", (deep, shallow))
        assert select_h_opt(fam, noisy, seed=0) == shallow
        # verified against the raw fold accuracies the selector uses
        assert cv_accuracies(shallow, noisy, seed=0).mean() > \
            cv_accuracies(deep, noisy, seed=0).mean()


class TestCostOfExhaustion:
    def test_single_class_costs_nothing(self, ds):
        fam = ModelFamily("tree", (trained("tree", max_depth=2, ccp_alpha=0.0),))
        report = cost_of_exhaustion(fam, ds, reps=2, bootstrap=100)
        assert report.cost_of_exhaustion == pytest.approx(0.0)
        assert report.h_acc_id == report.h_mu_id

    def test_cost_nonnegative_and_ci_ordered(self):
        noisy = noisy_threshold_dataset()
        fam = ModelFamily("tree", (trained("tree", max_depth=2, ccp_alpha=0.0),
                                   trained("tree", max_depth=128, ccp_alpha=0.0)))
        report = cost_of_exhaustion(fam, noisy, reps=3, bootstrap=200)
        assert report.cost_of_exhaustion >= 0
        assert report.ci_low <= report.ci_high
        assert set(report.per_class) == {c.class_id() for c in fam.grid}

    def test_overfitter_is_most_manipulable_on_noise(self):
        noisy = noisy_threshold_dataset()
        deep = trained("tree", max_depth=128, ccp_alpha=0.0)
        shallow = trained("tree", max_depth=2, ccp_alpha=0.0)
        report = cost_of_exhaustion(ModelFamily("tree", (deep, shallow)), noisy,
                                    reps=3, bootstrap=100)
        assert report.h_mu_id == deep.class_id()
        assert report.h_acc_id == shallow.class_id()
        assert report.cost_of_exhaustion > 0
