"""Tests for Trunk generation, bootstrap subsets and hold-out splits."""

import numpy as np
import pytest

from utils.sampling import bootstrap_sample, generate_trunk, train_test_split, trunk_means


class TestTrunk:

    def test_shape_and_balance(self):
        ds = generate_trunk(1000, 10, seed=7)
        assert ds.columns.shape == (10, 1000)
        assert ds.dtype == np.float32
        assert np.bincount(ds.labels).tolist() == [500, 500]

    def test_deterministic(self):
        a = generate_trunk(100, 4, seed=2)
        b = generate_trunk(100, 4, seed=2)
        np.testing.assert_array_equal(a.columns, b.columns)
        assert not np.array_equal(a.columns, generate_trunk(100, 4, seed=3).columns)

    def test_class_means_follow_decay(self):
        ds = generate_trunk(20000, 4, seed=0)
        means = trunk_means(4)
        for label, sign in ((0, 1.0), (1, -1.0)):
            observed = ds.columns[:, ds.labels == label].mean(axis=1)
            np.testing.assert_allclose(observed, sign * means, atol=0.05)

    def test_odd_sample_count(self):
        with pytest.raises(ValueError):
            generate_trunk(11, 3, seed=0)

    def test_no_features(self):
        with pytest.raises(ValueError):
            generate_trunk(10, 0, seed=0)


class TestBootstrap:

    def test_size_and_order(self, trunk_small):
        subset = bootstrap_sample(trunk_small, 0.632, seed=4)
        assert len(subset) == round(0.632 * trunk_small.n_samples)
        assert np.all(np.diff(subset.indices) > 0)
        subset.validate(trunk_small.n_samples)

    def test_seeded(self, trunk_small):
        a = bootstrap_sample(trunk_small, 0.5, seed=np.random.SeedSequence(9))
        b = bootstrap_sample(trunk_small, 0.5, seed=np.random.SeedSequence(9))
        np.testing.assert_array_equal(a.indices, b.indices)

    def test_full_fraction(self, trunk_small):
        np.testing.assert_array_equal(bootstrap_sample(trunk_small, 1.0).indices,
                                      np.arange(trunk_small.n_samples))

    @pytest.mark.parametrize('fraction', [0.0, -0.1, 1.5])
    def test_invalid_fraction(self, trunk_small, fraction):
        with pytest.raises(ValueError):
            bootstrap_sample(trunk_small, fraction)


def test_train_test_split_is_stratified(trunk_small):
    train, test = train_test_split(trunk_small, test_fraction=0.2, seed=0)
    assert train.n_samples == 320
    assert test.n_samples == 80
    assert np.bincount(test.labels).tolist() == [40, 40]
    assert train.label_names == trunk_small.label_names
