"""
Exact combinatorics over d-subsets of {0, ..., n-1}.

Colex order (the combinatorial number system) is the one coordinate order used
for tensor entries everywhere in the package: the rank of a subset
a_1 < ... < a_d is sum_k C(a_k, k). Indices are 0-based; ``SubsetIndex.one_based``
is for display only.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import BigCountOverflowError, PreconditionError

# Exact counts are Python ints; they never wrap.
BigCount = int


def _check_nd(n: int, d: int) -> None:
    if not (isinstance(n, (int, np.integer)) and isinstance(d, (int, np.integer))):
        raise PreconditionError(f"n and d must be integers, got {n!r}, {d!r}")
    if not 0 <= d <= n:
        raise PreconditionError(f"need 0 <= d <= n, got n={n}, d={d}")


@dataclass(frozen=True)
class SubsetIndex:
    """A d-element subset of {0, ..., n-1} stored as a strictly increasing tuple."""

    elements: Tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        elements = tuple(int(a) for a in self.elements)
        object.__setattr__(self, "elements", elements)
        if self.n < 0:
            raise PreconditionError(f"n must be nonnegative, got {self.n}")
        for a in elements:
            if not 0 <= a < self.n:
                raise PreconditionError(f"element {a} outside [0, {self.n})")
        for a, b in zip(elements, elements[1:]):
            if a >= b:
                raise PreconditionError(
                    f"elements must be strictly increasing: {elements}"
                )

    @property
    def d(self) -> int:
        return len(self.elements)

    def rank(self) -> int:
        return rank(self)

    def one_based(self) -> Tuple[int, ...]:
        """Elements shifted to the 1-based convention of the index set [n]_d."""
        return tuple(a + 1 for a in self.elements)

    def as_mask(self) -> int:
        mask = 0
        for a in self.elements:
            mask |= 1 << a
        return mask

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)


def binomial(n: int, d: int, bits: Optional[int] = None) -> BigCount:
    """
    Exact binomial coefficient C(n, d).

    Args:
        n: Ground set size
        d: Subset size, 0 <= d <= n
        bits: Optional fixed width; the count must fit in an unsigned integer
            of this many bits or ``BigCountOverflowError`` is raised

    Returns:
        C(n, d) as an arbitrary precision int
    """
    _check_nd(n, d)
    value = math.comb(int(n), int(d))
    if bits is not None and value.bit_length() > bits:
        raise BigCountOverflowError(
            f"C({n},{d}) needs {value.bit_length()} bits, exceeds {bits}-bit width",
            cap_name="bits",
            cap_value=bits,
        )
    return value


def log_binomial(n: int, d: int) -> float:
    """Natural log of C(n, d) by log-gamma summation."""
    _check_nd(n, d)
    return float(gammaln(n + 1) - gammaln(d + 1) - gammaln(n - d + 1))


def rank(s: SubsetIndex) -> int:
    """Colex rank sum_k C(a_k, k) of a subset (k is 1-based)."""
    if not isinstance(s, SubsetIndex):
        raise PreconditionError(f"expected SubsetIndex, got {type(s).__name__}")
    return sum(math.comb(a, k) for k, a in enumerate(s.elements, start=1))


def _largest_element(remaining: int, k: int, top: int) -> int:
    """Largest a in [k - 1, top] with C(a, k) <= remaining, by bisection."""
    candidates = range(k - 1, top + 1)
    pos = bisect_right(candidates, remaining, key=lambda a: math.comb(a, k))
    return candidates[pos - 1]


def unrank(r: int, n: int, d: int) -> SubsetIndex:
    """
    Inverse of ``rank``: greedy decoding, largest element first, each element
    found by binary search over C(a, k).

    Raises:
        PreconditionError: If r is outside [0, C(n, d))
    """
    total = binomial(n, d)
    if not 0 <= r < total:
        raise PreconditionError(f"rank {r} outside [0, {total}) for n={n}, d={d}")
    elements = []
    remaining = int(r)
    top = n - 1
    for k in range(d, 0, -1):
        a = _largest_element(remaining, k, top)
        elements.append(a)
        remaining -= math.comb(a, k)
        top = a - 1
    return SubsetIndex(tuple(reversed(elements)), n)


def iter_colex(n: int, d: int) -> Iterator[Tuple[int, ...]]:
    """Yield all d-subsets of range(n) as tuples in increasing colex rank."""
    _check_nd(n, d)
    if d == 0:
        yield ()
        return
    for top in range(d - 1, n):
        for head in iter_colex(top, d - 1):
            yield head + (top,)


def enumerate_subsets(n: int, d: int) -> Iterator[SubsetIndex]:
    """Yield all C(n, d) subsets as ``SubsetIndex`` in increasing colex rank."""
    for elements in iter_colex(n, d):
        yield SubsetIndex(elements, n)


@lru_cache(maxsize=32)
def subset_table(n: int, d: int) -> np.ndarray:
    """
    Colex table of all d-subsets, shape (C(n, d), d).

    Row r holds the elements of unrank(r, n, d). The returned array is
    read-only since it is shared through the cache.
    """
    _check_nd(n, d)
    if d == 0:
        table = np.zeros((1, 0), dtype=np.int64)
    else:
        table = np.array(list(iter_colex(n, d)), dtype=np.int64)
    table.setflags(write=False)
    return table
