"""Symmetric eigensolving and empirical spectral distributions."""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg

from ..core.errors import EigenSolverError, NonSymmetricMatrixError, PreconditionError

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8
ZERO_SNAP_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class ESD:
    """Empirical spectral distribution: sorted eigenvalues with weight 1/p each."""

    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        values = np.sort(np.asarray(self.eigenvalues, dtype=np.float64).ravel())
        if values.size == 0:
            raise PreconditionError("an ESD needs at least one eigenvalue")
        values.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)

    @property
    def p(self) -> int:
        return int(self.eigenvalues.size)

    def cdf(self, x):
        """Right-continuous F(x) = #{lambda_i <= x} / p."""
        return np.searchsorted(self.eigenvalues, x, side="right") / self.p

    def cdf_left(self, x):
        """Left limit F(x-) = #{lambda_i < x} / p."""
        return np.searchsorted(self.eigenvalues, x, side="left") / self.p

    def moment(self, k: int) -> float:
        return esd_moments(self, k)

    def snap_zeros(self, rel_tol: float = ZERO_SNAP_TOLERANCE) -> "ESD":
        """
        Copy with every |lambda| <= rel_tol * max|lambda| set to exactly 0.

        The null space of a rank-deficient matrix comes back from the solver as
        roundoff of either sign.
        """
        if not 0.0 <= rel_tol < 1.0:
            raise PreconditionError(f"rel_tol must lie in [0, 1), got {rel_tol}")
        values = self.eigenvalues
        scale = float(np.max(np.abs(values)))
        if scale == 0.0:
            return self
        return ESD(np.where(np.abs(values) <= rel_tol * scale, 0.0, values))

    @property
    def zero_count(self) -> int:
        return int(np.count_nonzero(self.eigenvalues == 0.0))


@dataclass(frozen=True, eq=False)
class EigenCheck:
    """Verification-mode output: the spectrum plus per-pair residual norms."""

    esd: ESD
    residuals: np.ndarray
    bound: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


@dataclass(frozen=True)
class Histogram:
    edges: List[float]
    counts: List[int]
    below: int
    above: int


def _check_symmetric(A) -> np.ndarray:
    a = np.asarray(A, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise PreconditionError(
            f"expected a nonempty square matrix, got shape {a.shape}"
        )
    if not np.array_equal(a, a.T):
        with np.errstate(invalid="ignore"):
            mismatch = float(np.nanmax(np.abs(a - a.T)))
        raise NonSymmetricMatrixError(
            f"matrix is not exactly symmetric (max |A - A^T| = {mismatch:g})"
        )
    return a


def eigen_residual(A) -> EigenCheck:
    """
    Full eigendecomposition with the residual contract
    ||A v - lambda v|| <= 1e-8 (||A||_F + 1) checked for every pair.

    Raises:
        EigenSolverError: On non-convergence or a residual breach; ``index``
            names the offending eigenpair when known
    """
    a = _check_symmetric(A)
    try:
        w, v = scipy.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    residuals = np.linalg.norm(a @ v - v * w, axis=0)
    bound = RESIDUAL_TOLERANCE * (float(np.linalg.norm(a, "fro")) + 1.0)
    worst = int(np.argmax(residuals))
    if residuals[worst] > bound:
        raise EigenSolverError(
            f"residual {residuals[worst]:.3e} exceeds {bound:.3e} at eigenpair {worst}",
            index=worst,
        )
    return EigenCheck(ESD(w), residuals, bound)


def eigenvalues_sym(A, verify: bool = False) -> ESD:
    """
    All eigenvalues of an exactly symmetric matrix, ascending.

    Args:
        A: Symmetric p x p matrix
        verify: Also compute eigenvectors and enforce the residual contract

    Returns:
        ESD of A

    Raises:
        NonSymmetricMatrixError: If any A[i, j] != A[j, i]
        EigenSolverError: If the solver fails
    """
    if verify:
        return eigen_residual(A).esd
    a = _check_symmetric(A)
    try:
        w = scipy.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    logger.debug("solved %dx%d symmetric eigenproblem", a.shape[0], a.shape[0])
    return ESD(w)


def esd_moments(esd: ESD, k: int) -> float:
    """p^-1 sum_i lambda_i^k."""
    if k < 1:
        raise PreconditionError(f"moment order must be >= 1, got {k}")
    return math.fsum(esd.eigenvalues**k) / esd.p


def histogram(esd: ESD, bins: int, lo: float, hi: float) -> Histogram:
    """Counts on a fixed grid of ``bins`` equal cells over [lo, hi]."""
    if bins < 1 or not hi > lo:
        raise PreconditionError(f"bad histogram grid: bins={bins}, [{lo}, {hi}]")
    counts, edges = np.histogram(esd.eigenvalues, bins=bins, range=(lo, hi))
    below = int(np.count_nonzero(esd.eigenvalues < lo))
    above = int(np.count_nonzero(esd.eigenvalues > hi))
    return Histogram([float(e) for e in edges], [int(c) for c in counts], below, above)
