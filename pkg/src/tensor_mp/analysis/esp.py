"""
Elementary symmetric polynomials of nonnegative variables.

S_n^(k) is the coefficient of t^k in prod_k (1 + Z_k t). The coefficients are
computed by a balanced product tree whose nodes hold natural-log coefficients,
so the values never overflow even when they span thousands of decades.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from ..core.errors import (
    InapplicableFormulaError,
    PreconditionError,
    ResourceCapError,
    TensorMPError,
)
from ..core.index_space import binomial, enumerate_subsets, log_binomial

logger = logging.getLogger(__name__)

BRUTE_FORCE_CAP = 10**6
MACLAURIN_SLACK = 1e-12
_BRACKET_STEPS = 4096


@dataclass(frozen=True)
class LogValue:
    """A real number stored as (natural log of |value|, sign)."""

    log_magnitude: float
    sign: int

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise PreconditionError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogValue") -> "LogValue":
        sign = self.sign * other.sign
        if sign == 0:
            return LogValue(-math.inf, 0)
        return LogValue(self.log_magnitude + other.log_magnitude, sign)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return self
        return LogValue(
            self.log_magnitude - other.log_magnitude, self.sign * other.sign
        )

    def __neg__(self) -> "LogValue":
        return LogValue(self.log_magnitude, -self.sign)


@dataclass(frozen=True)
class SaddleResult:
    """Root of sum_k rho / (Z_k + rho) = n - d, or the fallback rho = 1."""

    rho: float
    satisfied_equation: bool
    residual: float


def _check_z(Z, d: int) -> np.ndarray:
    z = np.asarray(Z, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise PreconditionError(f"Z must be a nonempty vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise PreconditionError("Z must be finite")
    if np.any(z < 0):
        raise PreconditionError(f"Z must be nonnegative, found min {z.min()}")
    if not 1 <= d <= z.size:
        raise PreconditionError(f"d must lie in [1, n={z.size}], got {d}")
    return z


def _convolve_logs(a: np.ndarray, b: np.ndarray, degree: int) -> np.ndarray:
    """Row-wise truncated product of log-coefficient polynomials."""
    out = np.empty((a.shape[0], degree + 1))
    for k in range(degree + 1):
        terms = a[:, : k + 1] + b[:, k::-1]
        out[:, k] = logsumexp(terms, axis=1)
    return out


def log_esp_coefficients(Z, d: int) -> np.ndarray:
    """
    Natural logs of S_n^(0), ..., S_n^(d); zero coefficients are -inf.

    Raises:
        PreconditionError: On negative entries or d outside [1, n]
    """
    z = _check_z(Z, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        level = np.full((z.size, d + 1), -np.inf)
        level[:, 0] = 0.0
        level[:, 1] = np.log(z)
        while level.shape[0] > 1:
            if level.shape[0] % 2:
                one = np.full((1, d + 1), -np.inf)
                one[0, 0] = 0.0
                level = np.vstack([level, one])
            level = _convolve_logs(level[0::2], level[1::2], d)
    return level[0]


def esp_all(Z, d: int) -> List[LogValue]:
    """
    S_n^(0), ..., S_n^(d) of a nonnegative vector as ``LogValue`` records.

    Args:
        Z: Nonnegative vector of length n
        d: Highest order, 1 <= d <= n

    Returns:
        List of d + 1 values, the first being 1
    """
    logs = log_esp_coefficients(Z, d)
    return [
        LogValue(float(v), 1) if np.isfinite(v) else LogValue(-math.inf, 0)
        for v in logs
    ]


def log_ustat(Z, d: int) -> LogValue:
    """U_n^(d) = S_n^(d) / C(n, d) in the log domain."""
    z = _check_z(Z, d)
    top = esp_all(z, d)[d]
    if top.sign == 0:
        return top
    return LogValue(top.log_magnitude - log_binomial(z.size, d), 1)


def maclaurin_gap(Z, d: int) -> float:
    """
    log(S_n / n) - (1/d) log U_n^(d), nonnegative by Maclaurin's inequality.

    Returns +inf when U vanishes.
    """
    z = _check_z(Z, d)
    u = log_ustat(z, d)
    if u.sign == 0:
        return math.inf
    return math.log(math.fsum(z) / z.size) - u.log_magnitude / d


def maclaurin_check(Z, d: int) -> bool:
    """True iff (S_n/n)^d >= U_n^(d) up to a relative 1e-12 log slack."""
    z = _check_z(Z, d)
    gap = maclaurin_gap(z, d)
    if math.isinf(gap):
        return True
    mean_log = math.log(math.fsum(z) / z.size)
    return gap >= -MACLAURIN_SLACK * (1.0 + abs(mean_log))


def _saddle_lhs(z: np.ndarray, rho: float) -> float:
    return math.fsum(rho / (z + rho))


def solve_rho(Z, d: int) -> SaddleResult:
    """
    Solve sum_k rho / (Z_k + rho) = n - d for rho > 0.

    The left side increases from #{Z_k = 0} to n, so a root exists iff the
    number of zeros is below n - d. Otherwise the fallback rho = 1 is returned
    with ``satisfied_equation`` False.

    Raises:
        PreconditionError: If d >= n
    """
    z = _check_z(Z, d)
    n = z.size
    if d >= n:
        raise PreconditionError(f"saddle equation needs d < n, got d={d}, n={n}")
    target = float(n - d)
    zeros = int(np.count_nonzero(z == 0))
    if zeros >= n - d:
        residual = abs(_saddle_lhs(z, 1.0) - target)
        logger.debug("saddle equation unsolvable: %d zeros, n-d=%d", zeros, n - d)
        return SaddleResult(1.0, False, residual)

    def f(rho: float) -> float:
        return _saddle_lhs(z, rho) - target

    lo = hi = 1.0
    for _ in range(_BRACKET_STEPS):
        if f(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise TensorMPError("could not bracket the saddle root from above")
    for _ in range(_BRACKET_STEPS):
        if f(lo) <= 0:
            break
        lo /= 2.0
    else:
        raise TensorMPError("could not bracket the saddle root from below")
    logger.debug("saddle bracket [%g, %g]", lo, hi)

    if f(lo) == 0:
        rho = lo
    else:
        rho = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return SaddleResult(float(rho), True, abs(f(rho)))


def asymptotic_log_ustat(Z, d: int) -> float:
    """
    Saddle-point approximation of log U_n^(d):

        sum_k log(Z_k / rho + 1) - d + d log(rho d / n)

    Raises:
        InapplicableFormulaError: If the saddle equation has no root
    """
    z = _check_z(Z, d)
    saddle = solve_rho(z, d)
    if not saddle.satisfied_equation:
        raise InapplicableFormulaError(
            "saddle equation has no root (too many zero entries); "
            "the asymptotic log-U formula does not apply"
        )
    rho = saddle.rho
    return math.fsum(np.log1p(z / rho)) - d + d * math.log(rho * d / z.size)


def esp_brute(Z, d: int) -> float:
    """
    S_n^(d) by enumerating all d-subsets with compensated summation.

    Raises:
        ResourceCapError: If C(n, d) exceeds one million
    """
    z = np.asarray(Z, dtype=np.float64)
    n = z.size
    count = binomial(n, d)
    if count > BRUTE_FORCE_CAP:
        raise ResourceCapError(
            f"C({n},{d}) = {count} subsets exceeds the enumeration cap "
            f"{BRUTE_FORCE_CAP}",
            cap_name="esp_brute",
            cap_value=BRUTE_FORCE_CAP,
        )
    return math.fsum(math.prod(z[a] for a in s) for s in enumerate_subsets(n, d))


def lln_statistic(Z, d: int) -> float:
    """d (S_n / n - 1), the centered mean of the LLN equivalence."""
    z = _check_z(Z, d)
    return d * (math.fsum(z) / z.size - 1.0)


def empirical_condition_iii(Z, d: int) -> Tuple[float, float]:
    """
    Plug-in (d E Z 1(dZ > n), (d^2/n) E Z^2 1(dZ <= n)) over the sample Z.
    """
    z = _check_z(Z, d)
    n = z.size
    above = d * z > n
    tail = d * math.fsum(z[above]) / n
    fourth = (d * d / n) * math.fsum(z[~above] ** 2) / n
    return tail, fourth
