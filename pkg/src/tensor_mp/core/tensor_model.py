"""
Sampling the symmetric random tensor model.

A sample is a vector X of n i.i.d. standardized entries; its tensor vector
x_p has one coordinate per d-subset i (colex order), equal to the product of
X_alpha over alpha in i. ``sample_covariance`` averages N outer products
x_k x_k^T.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..analysis.esp import esp_all
from .distributions import EntryDistribution
from .errors import PreconditionError, ResourceCapError
from .index_space import binomial, subset_table
from .rng import RngStream, block_bounds, map_reduce_blocks

logger = logging.getLogger(__name__)

DEFAULT_MAX_P = 4096
DEFAULT_BLOCK_SIZE = 256
TRACE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TensorModelSpec:
    """(n, d, entry law) of the random tensor model."""

    n: int
    d: int
    dist: EntryDistribution

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.d <= self.n:
            raise PreconditionError(f"d must lie in [1, n={self.n}], got {self.d}")

    @property
    def p(self) -> int:
        return binomial(self.n, self.d)


def sample_base(
    spec: TensorModelSpec, rng: RngStream, size: Optional[int] = None, block: int = 0
) -> np.ndarray:
    """
    Draw base vectors X.

    Args:
        spec: Model parameters
        rng: Stream to draw from
        size: Number of vectors; None returns a single vector of length n
        block: Substream index within ``rng``

    Returns:
        Array of shape (n,) or (size, n)
    """
    shape: Tuple[int, ...] = (spec.n,) if size is None else (int(size), spec.n)
    return spec.dist.sample(rng.generator(block), shape)


def _as_batch(X: np.ndarray, d: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(X, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise PreconditionError(
            f"expected a vector or a batch of vectors, got {arr.shape}"
        )
    n = arr.shape[1]
    if not 1 <= d <= n:
        raise PreconditionError(f"d must lie in [1, n={n}], got {d}")
    return arr, single


def vectorize(X: np.ndarray, d: int) -> np.ndarray:
    """
    Tensor vector of X by a colex prefix-product walk.

    In colex order the k-subsets of range(n) are grouped by their top element
    m, and the group for m is the (k-1)-subsets of range(m) times X[m]. Each
    level reuses a prefix of the previous one.

    Args:
        X: Vector of length n, or array (batch, n)
        d: Tensor order, 1 <= d <= n

    Returns:
        Array of length C(n, d), or (batch, C(n, d))
    """
    arr, single = _as_batch(X, d)
    n = arr.shape[1]
    level = np.ones((arr.shape[0], 1))
    for k in range(1, d + 1):
        pieces = [
            level[:, : math.comb(m, k - 1)] * arr[:, m : m + 1] for m in range(k - 1, n)
        ]
        level = np.concatenate(pieces, axis=1)
    return level[0] if single else level


def vectorize_unranked(X: np.ndarray, d: int) -> np.ndarray:
    """Tensor vector of X from the colex subset table, one product per row."""
    arr, single = _as_batch(X, d)
    table = subset_table(arr.shape[1], d)
    out = np.ones((arr.shape[0], table.shape[0]))
    for k in range(d):
        out = out * arr[:, table[:, k]]
    return out[0] if single else out


class CovarianceAccumulator:
    """Running sum of outer products, mergeable and exactly symmetric on finalize."""

    def __init__(self, p: int):
        self.p = p
        self.gram = np.zeros((p, p))
        self.count = 0
        self.sq_norms = 0.0

    def add(self, vectors: np.ndarray) -> "CovarianceAccumulator":
        vectors = np.atleast_2d(vectors)
        if vectors.shape[1] != self.p:
            raise PreconditionError(
                f"vector length {vectors.shape[1]} does not match p={self.p}"
            )
        self.gram += vectors.T @ vectors
        self.count += vectors.shape[0]
        self.sq_norms += math.fsum(np.einsum("ij,ij->i", vectors, vectors))
        return self

    def merge(self, other: "CovarianceAccumulator") -> "CovarianceAccumulator":
        if other.p != self.p:
            raise PreconditionError(f"cannot merge p={other.p} into p={self.p}")
        self.gram += other.gram
        self.count += other.count
        self.sq_norms += other.sq_norms
        return self

    @property
    def mean_sq_norm(self) -> float:
        """(1/N) sum_k ||x_k||^2, which equals the trace of the finalized matrix."""
        if self.count == 0:
            raise PreconditionError("no samples accumulated")
        return self.sq_norms / self.count

    def trace_gap(self, sigma: np.ndarray) -> float:
        """|trace(sigma) - mean_sq_norm| relative to mean_sq_norm."""
        expected = self.mean_sq_norm
        gap = abs(math.fsum(np.diag(sigma)) - expected)
        return gap / expected if expected > 0 else gap

    def finalize(self) -> np.ndarray:
        if self.count == 0:
            raise PreconditionError("no samples accumulated")
        upper = np.triu(self.gram)
        return (upper + np.triu(upper, 1).T) / self.count


def check_dense_cap(p: int, max_p: int) -> None:
    if p > max_p:
        raise ResourceCapError(
            f"p = {p} exceeds the dense matrix cap max_p = {max_p}",
            cap_name="max_p",
            cap_value=max_p,
        )


def sample_covariance(
    spec: TensorModelSpec,
    N: int,
    rng: RngStream,
    max_p: int = DEFAULT_MAX_P,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """
    Sample covariance (1/N) sum_k x_k x_k^T of N tensor vectors.

    Sample block b (``block_size`` consecutive samples) is drawn from
    ``rng.generator(b)``; block sums are merged in a fixed tree so the result
    does not depend on ``threads``.

    Raises:
        ResourceCapError: If p exceeds ``max_p``
    """
    if N < 1:
        raise PreconditionError(f"N must be >= 1, got {N}")
    p = spec.p
    check_dense_cap(p, max_p)
    blocks = block_bounds(N, block_size)
    logger.debug("sampling covariance p=%d N=%d in %d blocks", p, N, len(blocks))

    def work(b: int) -> CovarianceAccumulator:
        X = sample_base(spec, rng, size=len(blocks[b]), block=b)
        return CovarianceAccumulator(p).add(vectorize(X, spec.d))

    acc = map_reduce_blocks(work, len(blocks), lambda a, b: a.merge(b), threads)
    sigma = acc.finalize()
    gap = acc.trace_gap(sigma)
    if gap > TRACE_TOLERANCE:
        logger.warning("trace identity off by %.3e (relative)", gap)
    return sigma


def squared_norm_identity_check(X: np.ndarray, d: int) -> Tuple[float, float]:
    """
    Return (||vectorize(X, d)||^2, S_n^(d)(X_1^2, ..., X_n^2)).

    The two coincide for every X; the second is computed by ``esp_all``.
    """
    x = np.asarray(X, dtype=np.float64)
    if x.ndim != 1:
        raise PreconditionError(f"expected a single vector, got shape {x.shape}")
    v = vectorize(x, d)
    top = esp_all(x * x, d)[d]
    return math.fsum(v * v), top.value()
