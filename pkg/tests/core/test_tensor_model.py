"""Tests for tensor vectors and the sample covariance."""

import math

import numpy as np
import pytest

from tensor_mp.core.distributions import Gaussian, Rademacher
from tensor_mp.core.errors import PreconditionError, ResourceCapError
from tensor_mp.core.index_space import enumerate_subsets
from tensor_mp.core.rng import RngStream
from tensor_mp.core.tensor_model import (
    CovarianceAccumulator,
    TensorModelSpec,
    check_dense_cap,
    sample_base,
    sample_covariance,
    squared_norm_identity_check,
    vectorize,
    vectorize_unranked,
)
from tensor_mp.spectral.spectra import eigenvalues_sym
from tests.conftest import jacobi_eigenvalues


class TestTensorModelSpec:
    def test_dimension(self):
        assert TensorModelSpec(40, 2, Rademacher()).p == 780

    @pytest.mark.parametrize("n,d", [(0, 1), (5, 0), (5, 6)])
    def test_rejects(self, n, d):
        with pytest.raises(PreconditionError):
            TensorModelSpec(n, d, Gaussian())


class TestVectorize:
    """Coordinates are products over subsets in colex order."""

    def test_matches_definition(self):
        x = np.array([2.0, 3.0, 5.0, 7.0, 11.0])
        v = vectorize(x, 3)
        expected = [math.prod(x[a] for a in s) for s in enumerate_subsets(5, 3)]
        np.testing.assert_array_equal(v, expected)

    def test_order_one_is_identity(self):
        x = np.array([0.5, -1.0, 4.0])
        np.testing.assert_array_equal(vectorize(x, 1), x)

    def test_unranked_is_bit_identical(self, gen):
        X = gen.standard_normal((6, 11))
        for d in (1, 2, 4, 11):
            np.testing.assert_array_equal(vectorize(X, d), vectorize_unranked(X, d))

    def test_batch_rows(self, gen):
        X = gen.standard_normal((4, 7))
        V = vectorize(X, 3)
        assert V.shape == (4, 35)
        np.testing.assert_array_equal(V[2], vectorize(X[2], 3))

    def test_rejects_bad_order(self):
        with pytest.raises(PreconditionError):
            vectorize(np.ones(3), 4)
        with pytest.raises(PreconditionError):
            vectorize(np.ones((2, 2, 2)), 1)

    def test_squared_norm_is_esp(self, stream):
        for b in range(1000):
            gen = stream.generator(b)
            n = int(gen.integers(1, 13))
            d = int(gen.integers(1, n + 1))
            norm, esp = squared_norm_identity_check(gen.standard_normal(n), d)
            assert norm == pytest.approx(esp, rel=1e-10, abs=1e-300)


class TestCovariance:
    def test_accumulator_symmetry_and_merge(self, gen):
        V = gen.standard_normal((30, 6))
        whole = CovarianceAccumulator(6).add(V)
        split = CovarianceAccumulator(6).add(V[:11]).merge(
            CovarianceAccumulator(6).add(V[11:])
        )
        cov = split.finalize()
        np.testing.assert_array_equal(cov, cov.T)
        np.testing.assert_allclose(cov, whole.finalize(), rtol=1e-12)
        np.testing.assert_allclose(cov, V.T @ V / 30, rtol=1e-12)

    def test_accumulator_trace_identity(self, gen):
        V = gen.standard_normal((40, 10))
        acc = CovarianceAccumulator(10).add(V[:25]).merge(
            CovarianceAccumulator(10).add(V[25:])
        )
        sigma = acc.finalize()
        assert acc.mean_sq_norm == pytest.approx(np.sum(V * V) / 40, rel=1e-13)
        assert np.trace(sigma) == pytest.approx(acc.mean_sq_norm, rel=1e-12)
        assert acc.trace_gap(sigma) <= 1e-12

    def test_sample_covariance_trace_is_mean_squared_norm(self):
        spec = TensorModelSpec(7, 3, Gaussian())
        rng = RngStream(11)
        sigma = sample_covariance(spec, 120, rng)
        x = vectorize(sample_base(spec, rng, size=120, block=0), 3)
        assert np.trace(sigma) == pytest.approx(np.sum(x * x) / 120, rel=1e-12)

    @pytest.mark.parametrize("N", [5, 40])
    def test_positive_semidefinite(self, N):
        # N = 5 < p = 15 leaves a null space of dimension 10
        spec = TensorModelSpec(6, 2, Gaussian())
        sigma = sample_covariance(spec, N, RngStream(4))
        eigenvalues = jacobi_eigenvalues(sigma)
        assert eigenvalues[0] >= -1e-10 * np.linalg.norm(sigma, 2)
        np.testing.assert_allclose(
            eigenvalues, eigenvalues_sym(sigma).eigenvalues, atol=1e-10
        )

    def test_empty_accumulator(self):
        with pytest.raises(PreconditionError):
            CovarianceAccumulator(3).finalize()

    def test_dense_cap(self):
        spec = TensorModelSpec(48, 3, Rademacher())
        with pytest.raises(ResourceCapError) as info:
            sample_covariance(spec, 10, RngStream(1))
        assert info.value.cap_name == "max_p"
        check_dense_cap(4096, 4096)

    def test_thread_invariance(self):
        spec = TensorModelSpec(9, 2, Gaussian())
        serial = sample_covariance(spec, 1000, RngStream(3), block_size=64)
        threaded = sample_covariance(spec, 1000, RngStream(3), threads=4, block_size=64)
        np.testing.assert_array_equal(serial, threaded)

    def test_rademacher_diagonal_is_one(self):
        spec = TensorModelSpec(6, 2, Rademacher())
        cov = sample_covariance(spec, 50, RngStream(2))
        np.testing.assert_allclose(np.diag(cov), 1.0)

    def test_sample_base_shapes(self):
        spec = TensorModelSpec(5, 2, Gaussian())
        assert sample_base(spec, RngStream(0)).shape == (5,)
        assert sample_base(spec, RngStream(0), size=3, block=2).shape == (3, 5)
