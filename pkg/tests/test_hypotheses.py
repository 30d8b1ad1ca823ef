import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpaudit.dataspace import gen_synthetic
from mpaudit.hypotheses import (EnumerationCapError, HypothesisClass,
                                ModelFamily, TrainSpec, dictionary,
                                enumerate_consistent, exhaustive, is_member,
                                pack_labeling, default_grid, train, trained,
                                unpack_labeling)
from mpaudit.trainers import TrainerError


@pytest.fixture(scope="module")
def ds8():
    return gen_synthetic(8, 0.375, seed=3)


class TestClassConstruction:
    def test_class_ids(self):
        assert exhaustive().class_id() == "exhaustive"
        assert dictionary(5).class_id() == "dict_m5"
        cid = trained("tree", max_depth=4, ccp_alpha=0.1).class_id()
        assert cid == "tree(ccp_alpha=0.1,max_depth=4)"

    def test_hyperparameter_order_is_canonical(self):
        a = trained("tree", max_depth=4, ccp_alpha=0.1)
        b = trained("tree", ccp_alpha=0.1, max_depth=4)
        assert a == b

    def test_negative_memory_rejected(self):
        with pytest.raises(ValueError):
            dictionary(-1)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError):
            trained("svm")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            HypothesisClass("Fancy")


class TestMembership:
    def test_exhaustive_contains_everything(self):
        assert is_member(exhaustive(), np.array([1, 0, 1]))

    def test_dictionary_counts_ones(self):
        assert is_member(dictionary(2), np.array([1, 0, 1, 0]))
        assert not is_member(dictionary(1), np.array([1, 0, 1, 0]))

    def test_trained_membership_undecidable(self):
        with pytest.raises(ValueError):
            is_member(trained("linear"), np.zeros(4))


class TestEnumeration:
    def test_exhaustive_count_and_consistency(self, ds8):
        h_star = np.array([1, 0, 1, 0, 0, 1, 0, 1], dtype=np.int8)
        S = [0, 3, 5]
        hs = list(enumerate_consistent(exhaustive(), h_star, S, ds8))
        assert len(hs) == 2 ** 5
        assert all(all(h[q] == h_star[q] for q in S) for h in hs)
        assert len({h.tobytes() for h in hs}) == len(hs)

    def test_dictionary_count(self, ds8):
        h_star = np.zeros(8, dtype=np.int8)
        h_star[2] = 1
        S = [2, 4]
        hs = list(enumerate_consistent(dictionary(3), h_star, S, ds8))
        # one stored entry is pinned on the audit set; 2 slots remain over 6 free points
        expected = sum(math.comb(6, k) for k in range(3))
        assert len(hs) == expected
        assert all(is_member(dictionary(3), h) for h in hs)

    def test_platform_outside_class_rejected(self, ds8):
        with pytest.raises(ValueError, match="outside declared class"):
            list(enumerate_consistent(dictionary(1), np.ones(8, dtype=np.int8), [0], ds8))

    def test_cap_enforced(self, ds8):
        with pytest.raises(EnumerationCapError):
            list(enumerate_consistent(exhaustive(), np.zeros(8, dtype=np.int8),
                                      [], ds8, cap=4))


class TestTrain:
    def test_requires_trained_class(self, ds8):
        with pytest.raises(TrainerError):
            train(exhaustive(), ds8, TrainSpec(targets=np.zeros(8, dtype=np.int8)))

    def test_deterministic(self, ds8):
        cls = trained("tree", max_depth=4, ccp_alpha=0.0)
        spec = TrainSpec(targets=ds8.labels)
        a = train(cls, ds8, spec)
        b = train(cls, ds8, spec)
        assert np.array_equal(a, b)

    def test_mask_restricts_fit(self):
        ds = gen_synthetic(60, 0.3, seed=4)
        cls = trained("tree", max_depth=32, ccp_alpha=0.0)
        mask = np.arange(30)
        h = train(cls, ds, TrainSpec(targets=ds.labels, train_mask=mask))
        assert np.array_equal(h[mask], ds.labels[mask])


class TestDefaultGrids:
    @pytest.mark.parametrize("kind,size", [
        ("linear", 16), ("perceptron", 5), ("tree", 70), ("gbdt", 84)])
    def test_grid_sizes(self, kind, size):
        fam = default_grid(kind)
        assert len(fam.grid) == size
        assert len({c.class_id() for c in fam.grid}) == size

    def test_duplicate_grids_rejected(self):
        cls = trained("tree", max_depth=2)
        with pytest.raises(ValueError):
            ModelFamily("tree", (cls, cls))


class TestPacking:
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
    @settings(max_examples=50, deadline=None)
    def test_roundtrip(self, bits):
        h = np.array(bits, dtype=np.int8)
        assert np.array_equal(unpack_labeling(pack_labeling(h), len(bits)), h)
