"""Tests for batch-means estimators."""

import math

import numpy as np
import pytest

from tensor_mp.core.errors import PreconditionError
from tensor_mp.core.montecarlo import VarEstimate, batch_mean, batch_variance


class TestBatchMean:
    def test_point_and_error(self):
        est = batch_mean([np.array([1.0, 1.0]), np.array([3.0, 3.0])])
        assert est.point == 2.0
        assert est.std_error == pytest.approx(1.0)
        assert (est.reps, est.batches) == (4, 2)

    def test_rejects_single_batch(self):
        with pytest.raises(PreconditionError):
            batch_mean([np.ones(10)])

    def test_rejects_unequal_batches(self):
        with pytest.raises(PreconditionError):
            batch_mean([np.ones(3), np.ones(4)])


class TestBatchVariance:
    def test_pooled_unbiased(self, gen):
        batches = [gen.standard_normal(5000) * 2.0 for _ in range(20)]
        est = batch_variance(batches)
        pooled = np.concatenate(batches)
        assert est.point == pytest.approx(float(np.var(pooled, ddof=1)))
        assert est.within(4.0)
        assert est.std_error > 0

    def test_within(self):
        est = VarEstimate(point=1.0, std_error=0.1, reps=100, batches=10)
        assert est.within(1.39)
        assert not est.within(1.41)

    def test_constant_sample(self):
        est = batch_variance([np.full(4, 2.0), np.full(4, 2.0)])
        assert est.point == 0.0
        assert est.std_error == 0.0
        assert math.isfinite(est.std_error)
