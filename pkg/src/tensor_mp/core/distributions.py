"""
Base-variable laws of the random tensor model.

Entry laws (``EntryDistribution``) are standardized to mean 0 and variance 1.
Nonnegative laws (``ZDistribution``) have mean 1 and feed the elementary
symmetric polynomial experiments; ``SquaredEntryZ`` links the two through
Z = X^2.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import gammainc, gammaincc

from .errors import PreconditionError


class DistributionKind(Enum):
    """Supported entry laws."""

    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"
    TWO_POINT = "two-point"
    STUDENT_T = "student-t"
    SPARSE_BERNOULLI = "sparse"


@dataclass(frozen=True)
class TruncatedMoments:
    """
    Moments of a nonnegative variable W split at a threshold c.

    For entry laws W = X^2: ``lower_above`` is E X^2 1(X^2 > c),
    ``lower_below`` is E X^2 1(X^2 <= c) and ``upper_below`` is
    E X^4 1(X^2 <= c). For Z laws the same slots hold E Z 1(Z > c),
    E Z 1(Z <= c) and E Z^2 1(Z <= c).
    """

    lower_above: float
    lower_below: float
    upper_below: float


class EntryDistribution(ABC):
    """A standardized (mean 0, variance 1) base-variable law."""

    kind: DistributionKind

    @abstractmethod
    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw i.i.d. variables with the given numpy shape."""

    @abstractmethod
    def fourth_moment(self) -> float:
        """Exact E X^4, or ``math.inf`` when it does not exist."""

    def truncated_moments(self, threshold: float) -> Optional[TruncatedMoments]:
        """Closed-form truncated moments of X^2 at ``threshold``, if available."""
        return None

    @property
    def label(self) -> str:
        return self.kind.value


class FiniteSupportEntry(EntryDistribution):
    """Entry law with finitely many atoms; truncated moments are exact sums."""

    @abstractmethod
    def squared_atoms(self) -> List[Tuple[float, float]]:
        """(value of X^2, probability) pairs."""

    def fourth_moment(self) -> float:
        return math.fsum(prob * sq * sq for sq, prob in self.squared_atoms())

    def truncated_moments(self, threshold: float) -> TruncatedMoments:
        above = math.fsum(p * sq for sq, p in self.squared_atoms() if sq > threshold)
        below = math.fsum(p * sq for sq, p in self.squared_atoms() if sq <= threshold)
        fourth = math.fsum(
            p * sq * sq for sq, p in self.squared_atoms() if sq <= threshold
        )
        return TruncatedMoments(above, below, fourth)


@dataclass(frozen=True)
class Rademacher(FiniteSupportEntry):
    kind = DistributionKind.RADEMACHER

    def sample(self, rng, size):
        return rng.choice(np.array([-1.0, 1.0]), size=size)

    def squared_atoms(self):
        return [(1.0, 1.0)]

    def fourth_moment(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Gaussian(EntryDistribution):
    kind = DistributionKind.GAUSSIAN

    def sample(self, rng, size):
        return rng.standard_normal(size)

    def fourth_moment(self) -> float:
        return 3.0

    def truncated_moments(self, threshold: float) -> TruncatedMoments:
        # X^2 ~ Gamma(1/2, scale 2): E X^{2m} 1(X^2 <= c) = E X^{2m} P(m + 1/2, c/2).
        half = max(threshold, 0.0) / 2.0
        return TruncatedMoments(
            float(gammaincc(1.5, half)),
            float(gammainc(1.5, half)),
            3.0 * float(gammainc(2.5, half)),
        )


@dataclass(frozen=True)
class TwoPoint(FiniteSupportEntry):
    """X = a w.p. 1/(1+a^2) and -1/a w.p. a^2/(1+a^2)."""

    a: float = 2.0
    kind = DistributionKind.TWO_POINT

    def __post_init__(self) -> None:
        if not self.a > 1:
            raise PreconditionError(f"two-point parameter must exceed 1, got {self.a}")

    def sample(self, rng, size):
        a = self.a
        high = rng.random(size) < 1.0 / (1.0 + a * a)
        return np.where(high, a, -1.0 / a)

    def squared_atoms(self):
        a2 = self.a * self.a
        return [(a2, 1.0 / (1.0 + a2)), (1.0 / a2, a2 / (1.0 + a2))]

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.a:g}"


@dataclass(frozen=True)
class StudentT(EntryDistribution):
    """Student t with nu > 2 degrees of freedom scaled by sqrt(nu / (nu - 2))."""

    nu: float = 5.0
    kind = DistributionKind.STUDENT_T

    def __post_init__(self) -> None:
        if not self.nu > 2:
            raise PreconditionError(f"student-t needs nu > 2, got {self.nu}")

    def sample(self, rng, size):
        scale = math.sqrt(self.nu / (self.nu - 2.0))
        return rng.standard_t(self.nu, size) / scale

    def fourth_moment(self) -> float:
        if self.nu <= 4:
            return math.inf
        return 3.0 * (self.nu - 2.0) / (self.nu - 4.0)

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.nu:g}"


@dataclass(frozen=True)
class SparseBernoulli(FiniteSupportEntry):
    """X = +-q^{-1/2} each w.p. q/2, else 0."""

    q: float = 0.5
    kind = DistributionKind.SPARSE_BERNOULLI

    def __post_init__(self) -> None:
        if not 0 < self.q <= 1:
            raise PreconditionError(f"sparsity q must lie in (0, 1], got {self.q}")

    def sample(self, rng, size):
        u = rng.random(size)
        value = 1.0 / math.sqrt(self.q)
        half = self.q / 2.0
        out = np.zeros(np.shape(u))
        out[u < half] = -value
        out[(u >= half) & (u < self.q)] = value
        return out

    def squared_atoms(self):
        atoms = [(1.0 / self.q, self.q)]
        if self.q < 1:
            atoms.append((0.0, 1.0 - self.q))
        return atoms

    def fourth_moment(self) -> float:
        return 1.0 / self.q

    def truncated_moments(self, threshold: float) -> TruncatedMoments:
        # All of E X^2 = 1 sits on the atom X^2 = 1/q.
        if 1.0 / self.q > threshold:
            return TruncatedMoments(1.0, 0.0, 0.0)
        return TruncatedMoments(0.0, 1.0, 1.0 / self.q)

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.q:g}"


class ZDistribution(ABC):
    """A nonnegative law with E Z = 1."""

    name: str = ""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw i.i.d. nonnegative variables."""

    def truncated_moments(self, threshold: float) -> Optional[TruncatedMoments]:
        return None

    @property
    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class OnesZ(ZDistribution):
    """Degenerate Z = 1."""

    name = "one"

    def sample(self, rng, size):
        return np.ones(size)

    def truncated_moments(self, threshold: float) -> TruncatedMoments:
        if 1.0 > threshold:
            return TruncatedMoments(1.0, 0.0, 0.0)
        return TruncatedMoments(0.0, 1.0, 1.0)


@dataclass(frozen=True)
class ExponentialZ(ZDistribution):
    """Z ~ Exp(1)."""

    name = "exp"

    def sample(self, rng, size):
        return rng.standard_exponential(size)

    def truncated_moments(self, threshold: float) -> TruncatedMoments:
        c = max(threshold, 0.0)
        # E Z^m 1(Z <= c) = m! P(m + 1, c).
        return TruncatedMoments(
            float(gammaincc(2.0, c)),
            float(gammainc(2.0, c)),
            2.0 * float(gammainc(3.0, c)),
        )


@dataclass(frozen=True)
class SquaredEntryZ(ZDistribution):
    """Z = X^2 for a standardized entry law X."""

    entry: EntryDistribution = Rademacher()

    def sample(self, rng, size):
        x = self.entry.sample(rng, size)
        return x * x

    def truncated_moments(self, threshold: float) -> Optional[TruncatedMoments]:
        return self.entry.truncated_moments(threshold)

    @property
    def label(self) -> str:
        return f"sq-{self.entry.label}"


def _param(text: str, name: str, raw: Optional[str], default: float) -> float:
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise PreconditionError(
            f"bad parameter {raw!r} for {name} in {text!r}"
        ) from exc


def parse_distribution(text: str) -> EntryDistribution:
    """
    Parse an entry law from ``name[:param]``.

    Accepted names: rademacher, gaussian, two-point:<a>, student-t:<nu>,
    sparse:<q>.
    """
    name, _, raw = text.strip().lower().partition(":")
    if name == DistributionKind.RADEMACHER.value:
        return Rademacher()
    if name in (DistributionKind.GAUSSIAN.value, "normal"):
        return Gaussian()
    if name in (DistributionKind.TWO_POINT.value, "twopoint"):
        return TwoPoint(_param(text, name, raw, 2.0))
    if name in (DistributionKind.STUDENT_T.value, "t"):
        return StudentT(_param(text, name, raw, 5.0))
    if name in (DistributionKind.SPARSE_BERNOULLI.value, "sparse-bernoulli"):
        return SparseBernoulli(_param(text, name, raw, 0.5))
    raise PreconditionError(f"unknown distribution {text!r}")


def parse_z_distribution(text: str) -> ZDistribution:
    """
    Parse a nonnegative law: ``one``, ``exp`` or ``sq-<entry law>``
    (e.g. ``sq-sparse:0.01``).
    """
    cleaned = text.strip().lower()
    if cleaned in ("one", "ones", "const"):
        return OnesZ()
    if cleaned in ("exp", "exponential"):
        return ExponentialZ()
    if cleaned.startswith("sq-"):
        return SquaredEntryZ(parse_distribution(cleaned[3:]))
    raise PreconditionError(f"unknown nonnegative distribution {text!r}")
