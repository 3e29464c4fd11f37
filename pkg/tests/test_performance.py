"""Benchmarks for the numeric hot paths."""

import numpy as np
import pytest

from tensor_mp.analysis.esp import esp_all, solve_rho
from tensor_mp.analysis.gamma import gamma_brute_histogram
from tensor_mp.core.distributions import Gaussian
from tensor_mp.core.rng import RngStream
from tensor_mp.core.tensor_model import TensorModelSpec, sample_covariance, vectorize
from tensor_mp.spectral.spectra import eigenvalues_sym


@pytest.fixture(scope="module")
def z():
    return RngStream(3).generator(0).exponential(size=4000)


class TestPerformance:
    """Performance benchmarks for the sampling, spectral and ESP kernels."""

    def test_vectorize_benchmark(self, benchmark):
        X = RngStream(1).generator(0).standard_normal((256, 40))
        out = benchmark(vectorize, X, 2)
        assert out.shape == (256, 780)

    def test_sample_covariance_benchmark(self, benchmark):
        spec = TensorModelSpec(30, 2, Gaussian())
        sigma = benchmark(sample_covariance, spec, 1000, RngStream(2))
        assert sigma.shape == (435, 435)

    def test_eigenvalues_benchmark(self, benchmark):
        a = RngStream(4).generator(0).standard_normal((400, 400))
        esd = benchmark(eigenvalues_sym, a + a.T)
        assert esd.p == 400

    def test_esp_benchmark(self, benchmark, z):
        values = benchmark(esp_all, z, 20)
        assert values[20].sign == 1

    def test_saddle_benchmark(self, benchmark, z):
        assert benchmark(solve_rho, z, 20).satisfied_equation

    def test_gamma_histogram_benchmark(self, benchmark):
        hist = benchmark(gamma_brute_histogram, 10, 3, 1)
        assert sum(hist.values()) > 0
        assert np.all(np.array(list(hist)) <= 1)
