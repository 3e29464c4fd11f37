"""Shared fixtures and independent oracles for the tensor-mp test suite."""

import math
from itertools import combinations

import numpy as np
import pytest

from tensor_mp.core.rng import RngStream


@pytest.fixture
def stream():
    """A fixed random stream for tests that need reproducible draws."""
    return RngStream(seed=20240601, stream_id=7)


@pytest.fixture
def gen(stream):
    return stream.generator(0)


def jacobi_eigenvalues(A, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi rotations; ascending eigenvalues of a symmetric matrix."""
    a = np.array(A, dtype=np.float64)
    p = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * max(1.0, float(np.linalg.norm(a))):
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if a[i, j] == 0.0:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * a[i, j])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta**2 + 1))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(p)
                rot[i, i] = rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def newton_esp(z, d):
    """e_0..e_d from power sums by Newton's identities."""
    z = np.asarray(z, dtype=np.float64)
    power = [math.fsum(z**k) for k in range(d + 1)]
    e = [1.0]
    for k in range(1, d + 1):
        e.append(
            math.fsum((-1) ** (i - 1) * e[k - i] * power[i] for i in range(1, k + 1))
            / k
        )
    return e


def double_loop_variance(n, d, K):
    """var(||x||^2) = sum over pairs of d-subsets of K^|i & j| - 1."""
    subsets = [frozenset(c) for c in combinations(range(n), d)]
    return math.fsum(K ** len(i & j) - 1.0 for i in subsets for j in subsets)
