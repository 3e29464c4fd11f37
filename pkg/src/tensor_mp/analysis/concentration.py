"""
Variance of quadratic forms x^T A x in the random tensor model.

Three upper bounds on var(x^T A x), each p tr(A A^T) times a case factor:

    diagonal A       (1 + K d/n)^d - 1
    zero-diagonal A  (1 + 2K d/n)^d (16 d/n) min(d, 8)
    arbitrary A      64 K d^2 / n

with K the fourth moment of the entries, and the lower bound
p^2 (K - 1) d^2 / n for A = I.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from ..core.errors import PreconditionError, ResourceCapError
from ..core.montecarlo import VarEstimate, batch_variance
from ..core.rng import RngStream, block_bounds, map_blocks
from ..core.tensor_model import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_MAX_P,
    TensorModelSpec,
    check_dense_cap,
    vectorize,
)

logger = logging.getLogger(__name__)

DEFAULT_BATCHES = 20
MIN_REPS = 100
EXACT_ORACLE_CAP = 5000
POWER_ITERATION_TOL = 1e-6


class MatrixKind(Enum):
    DIAGONAL = "diagonal"
    ZERO_DIAGONAL = "zero-diagonal"
    ARBITRARY = "arbitrary"


class MatrixGenerator(Enum):
    IDENTITY = "identity"
    PROJECTION = "projection"
    RANDOM_SIGNS = "zero-diag-signs"
    CUSTOM = "custom"


def spectral_norm_estimate(
    A: np.ndarray, tol: float = POWER_ITERATION_TOL, max_iter: int = 10_000
) -> float:
    """
    Largest singular value of A by power iteration on A^T A.

    Stops when the estimate changes by less than ``tol`` relative.
    """
    a = np.asarray(A, dtype=np.float64)
    if not np.any(a):
        return 0.0
    v = np.random.Generator(np.random.Philox(0)).standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for it in range(max_iter):
        w = a.T @ (a @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        previous, estimate = estimate, math.sqrt(norm)
        if abs(estimate - previous) <= tol * estimate:
            logger.debug("power iteration converged in %d steps: %g", it + 1, estimate)
            break
    return estimate


def generator_kind(generator: MatrixGenerator) -> Optional[MatrixKind]:
    """Kind a generated matrix has for p > 1; None for custom matrices."""
    return {
        MatrixGenerator.IDENTITY: MatrixKind.DIAGONAL,
        MatrixGenerator.RANDOM_SIGNS: MatrixKind.ZERO_DIAGONAL,
        MatrixGenerator.PROJECTION: MatrixKind.ARBITRARY,
    }.get(generator)


def _mirror_upper(a: np.ndarray) -> np.ndarray:
    upper = np.triu(a)
    return upper + np.triu(upper, 1).T


def classify_matrix(A: np.ndarray) -> MatrixKind:
    """Diagonal when the off-diagonal vanishes (A = 0 included), then zero-diagonal."""
    a = np.asarray(A)
    diag = np.diag(a)
    off = a - np.diag(diag)
    if not np.any(off):
        return MatrixKind.DIAGONAL
    if not np.any(diag):
        return MatrixKind.ZERO_DIAGONAL
    return MatrixKind.ARBITRARY


@dataclass(frozen=True, eq=False)
class MatrixCase:
    """
    A test matrix for the quadratic-form experiments.

    The identity is kept implicit (``matrix`` is None) so it works at any p.
    """

    kind: MatrixKind
    generator: MatrixGenerator
    p: int
    matrix: Optional[np.ndarray] = None
    spectral_norm: float = 1.0
    rank_fraction: Optional[float] = None

    @classmethod
    def identity(cls, p: int) -> "MatrixCase":
        return cls(MatrixKind.DIAGONAL, MatrixGenerator.IDENTITY, p)

    @classmethod
    def zero_diagonal_signs(
        cls, p: int, rng: RngStream, max_p: int = DEFAULT_MAX_P
    ) -> "MatrixCase":
        """Symmetric random signs, zero diagonal, scaled to spectral norm about 1."""
        check_dense_cap(p, max_p)
        signs = rng.generator(0).choice(np.array([-1.0, 1.0]), size=(p, p))
        upper = np.triu(signs, 1)
        a = upper + upper.T
        norm = spectral_norm_estimate(a)
        if norm > 0:
            a = a / norm
        return cls(
            classify_matrix(a),
            MatrixGenerator.RANDOM_SIGNS,
            p,
            a,
            spectral_norm_estimate(a),
        )

    @classmethod
    def projection(
        cls, p: int, fraction: float, rng: RngStream, max_p: int = DEFAULT_MAX_P
    ) -> "MatrixCase":
        """Orthogonal projection onto a random subspace of dimension ~fraction * p."""
        if not 0 < fraction <= 1:
            raise PreconditionError(f"rank fraction must lie in (0, 1], got {fraction}")
        check_dense_cap(p, max_p)
        r = max(1, int(round(fraction * p)))
        gaussian = rng.generator(0).standard_normal((p, r))
        q, _ = np.linalg.qr(gaussian)
        a = _mirror_upper(q @ q.T)
        return cls(
            classify_matrix(a), MatrixGenerator.PROJECTION, p, a, 1.0, fraction
        )

    @classmethod
    def custom(cls, A: np.ndarray, max_p: int = DEFAULT_MAX_P) -> "MatrixCase":
        a = np.asarray(A, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise PreconditionError(f"expected a square matrix, got shape {a.shape}")
        check_dense_cap(a.shape[0], max_p)
        return cls(
            classify_matrix(a),
            MatrixGenerator.CUSTOM,
            a.shape[0],
            a,
            spectral_norm_estimate(a),
        )

    @property
    def trAAt(self) -> float:
        """tr(A A^T), the squared Frobenius norm."""
        if self.matrix is None:
            return float(self.p)
        return math.fsum((self.matrix * self.matrix).ravel())

    @property
    def label(self) -> str:
        if self.generator is MatrixGenerator.PROJECTION:
            return f"projection:{self.rank_fraction:g}"
        return self.generator.value

    def quadratic_forms(self, vectors: np.ndarray) -> np.ndarray:
        """x^T A x for every row x of ``vectors``."""
        v = np.atleast_2d(vectors)
        if v.shape[1] != self.p:
            raise PreconditionError(
                f"vector length {v.shape[1]} does not match p={self.p}"
            )
        if self.matrix is None:
            return np.einsum("ij,ij->i", v, v)
        return np.einsum("ij,ij->i", v @ self.matrix, v)


def parse_matrix_spec(text: str) -> Tuple[MatrixGenerator, Optional[float]]:
    """
    Parse ``identity``, ``zero-diag-signs`` or ``projection[:fraction]``
    (fraction defaults to 0.5).
    """
    name, _, raw = text.strip().lower().partition(":")
    if name == MatrixGenerator.IDENTITY.value:
        return MatrixGenerator.IDENTITY, None
    if name == MatrixGenerator.RANDOM_SIGNS.value:
        return MatrixGenerator.RANDOM_SIGNS, None
    if name == MatrixGenerator.PROJECTION.value:
        try:
            fraction = float(raw) if raw else 0.5
        except ValueError as exc:
            raise PreconditionError(f"bad projection fraction in {text!r}") from exc
        if not 0 < fraction <= 1:
            raise PreconditionError(f"rank fraction must lie in (0, 1], got {fraction}")
        return MatrixGenerator.PROJECTION, fraction
    raise PreconditionError(
        f"unknown matrix {text!r}; use identity, zero-diag-signs or projection:<frac>"
    )


def build_matrix_case(
    text: str, p: int, rng: RngStream, max_p: int = DEFAULT_MAX_P
) -> MatrixCase:
    """Construct the named test matrix at dimension p."""
    generator, fraction = parse_matrix_spec(text)
    if generator is MatrixGenerator.IDENTITY:
        return MatrixCase.identity(p)
    if generator is MatrixGenerator.RANDOM_SIGNS:
        return MatrixCase.zero_diagonal_signs(p, rng, max_p)
    return MatrixCase.projection(p, fraction or 0.5, rng, max_p)


def qform(x: np.ndarray, A: Union[np.ndarray, MatrixCase]) -> float:
    """
    x^T A x.

    Raises:
        PreconditionError: On a dimension mismatch
    """
    if isinstance(A, MatrixCase):
        vec = np.asarray(x, dtype=np.float64)
        if vec.ndim != 1:
            raise PreconditionError(f"expected a vector, got shape {vec.shape}")
        return float(A.quadratic_forms(vec)[0])
    a = np.asarray(A, dtype=np.float64)
    vec = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or vec.ndim != 1 or a.shape != (vec.size, vec.size):
        raise PreconditionError(
            f"dimension mismatch: x has shape {vec.shape}, A has shape {a.shape}"
        )
    return float(vec @ (a @ vec))


def mc_variance(
    spec: TensorModelSpec,
    case: MatrixCase,
    reps: int,
    rng: RngStream,
    batches: int = DEFAULT_BATCHES,
    threads: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> VarEstimate:
    """
    Monte Carlo variance of x^T A x over ``reps`` independent tensor vectors.

    Batch b is drawn from ``rng.generator(b)``; the standard error is the
    spread of the per-batch variance estimates.

    Raises:
        PreconditionError: If reps < 100, reps is not a multiple of
            ``batches`` or the matrix size differs from p
    """
    if reps < MIN_REPS:
        raise PreconditionError(f"reps must be >= {MIN_REPS}, got {reps}")
    if batches < 2 or reps % batches:
        raise PreconditionError(f"reps={reps} must be divisible by batches={batches}")
    if case.p != spec.p:
        raise PreconditionError(f"matrix size {case.p} does not match p={spec.p}")
    per_batch = reps // batches

    def work(b: int) -> np.ndarray:
        gen = rng.generator(b)
        out = np.empty(per_batch)
        for chunk in block_bounds(per_batch, block_size):
            X = spec.dist.sample(gen, (len(chunk), spec.n))
            out[chunk.start : chunk.stop] = case.quadratic_forms(vectorize(X, spec.d))
        return out

    return batch_variance(map_blocks(work, batches, threads))


def _fourth_moment_check(K: float) -> None:
    if not math.isfinite(K):
        raise PreconditionError("fourth moment K is infinite")
    if K < 1:
        raise PreconditionError(f"fourth moment K must be >= 1, got {K}")


def exact_variance_diag_oracle(spec: TensorModelSpec) -> float:
    """
    Exact var(||x||^2) = sum_{i,j} (K^{|i & j|} - 1) over pairs of d-subsets,
    summed by overlap t with multiplicity C(n,d) C(d,t) C(n-d,d-t).

    Raises:
        ResourceCapError: If p > 5000
        PreconditionError: If the fourth moment is infinite
    """
    p = spec.p
    if p > EXACT_ORACLE_CAP:
        raise ResourceCapError(
            f"p = {p} exceeds the exact oracle cap {EXACT_ORACLE_CAP}",
            cap_name="exact_oracle",
            cap_value=EXACT_ORACLE_CAP,
        )
    K = spec.dist.fourth_moment()
    _fourth_moment_check(K)
    n, d = spec.n, spec.d
    return p * math.fsum(
        math.comb(d, t) * math.comb(n - d, d - t) * (K**t - 1.0) for t in range(d + 1)
    )


def theorem2_factor(kind: MatrixKind, K: float, d: int, n: int) -> float:
    """The case factor of the variance bound, without checking hypotheses."""
    if kind is MatrixKind.DIAGONAL:
        return (1.0 + K * d / n) ** d - 1.0
    if kind is MatrixKind.ZERO_DIAGONAL:
        return (1.0 + 2.0 * K * d / n) ** d * (16.0 * d / n) * min(d, 8)
    return 64.0 * K * d * d / n


def check_theorem2_hypotheses(kind: MatrixKind, K: float, d: int, n: int) -> None:
    """
    Raise ``PreconditionError`` naming the first failed hypothesis.

    Diagonal and zero-diagonal cases need n >= 16d; the arbitrary case needs
    2K d^2 <= n.
    """
    _fourth_moment_check(K)
    if not 1 <= d <= n:
        raise PreconditionError(f"need 1 <= d <= n, got d={d}, n={n}")
    if kind is MatrixKind.ARBITRARY:
        lhs = 2.0 * K * d * d
        if lhs > n:
            raise PreconditionError(f"2K d² ≤ n violated ({lhs:g} > {n})")
    elif n < 16 * d:
        raise PreconditionError(f"n ≥ 16d violated ({n} < {16 * d})")


def bound_theorem2(
    case: Union[MatrixKind, MatrixCase],
    p: int,
    trAAt: float,
    K: float,
    d: int,
    n: int,
) -> float:
    """
    Upper bound p tr(A A^T) * factor on var(x^T A x).

    Args:
        case: Matrix kind, or a case whose kind is used
        p: Dimension C(n, d)
        trAAt: tr(A A^T)
        K: Fourth moment of the entries
        d: Tensor order
        n: Base dimension

    Raises:
        PreconditionError: If a hypothesis of the bound fails
    """
    kind = case.kind if isinstance(case, MatrixCase) else case
    check_theorem2_hypotheses(kind, K, d, n)
    return p * trAAt * theorem2_factor(kind, K, d, n)


def hoeffding_lower(p: int, K: float, d: int, n: int) -> float:
    """Lower bound p^2 (K - 1) d^2 / n on var(||x||^2)."""
    _fourth_moment_check(K)
    return p * p * (K - 1.0) * d * d / n


def diagonal_sandwich(spec: TensorModelSpec) -> Tuple[float, float, float]:
    """(hoeffding_lower, exact variance, diagonal bound) for A = I."""
    K = spec.dist.fourth_moment()
    p = spec.p
    exact = exact_variance_diag_oracle(spec)
    upper = p * float(p) * theorem2_factor(MatrixKind.DIAGONAL, K, spec.d, spec.n)
    return hoeffding_lower(p, K, spec.d, spec.n), exact, upper

