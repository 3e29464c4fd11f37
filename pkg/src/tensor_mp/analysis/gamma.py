"""
Counting quadruples of d-subsets for the zero-diagonal variance bound.

For a fixed pair (i, j) with |i & j| = t, gamma(s, t) counts the pairs (k, l)
with |k & l| = t such that no element of i | j | k | l is covered exactly
once, and c3 / 2 + c4 = s, where c_m is the number of elements covered by
exactly m of the four sets.
"""

import logging
import math
from collections import Counter
from typing import Dict, Optional, Tuple

import numpy as np

from ..core.errors import PreconditionError, ResourceCapError
from ..core.index_space import SubsetIndex, binomial, log_binomial, subset_table
from ..core.rng import RngStream

logger = logging.getLogger(__name__)

BRUTE_PAIR_CAP = 10**7

BasePair = Tuple[SubsetIndex, SubsetIndex]


def lambda_counts(
    i: SubsetIndex, j: SubsetIndex, k: SubsetIndex, m: SubsetIndex
) -> Tuple[int, int, int, int]:
    """(c1, c2, c3, c4): how many elements are covered by exactly 1..4 of the sets."""
    sets = (i, j, k, m)
    if len({s.n for s in sets}) != 1:
        raise PreconditionError("all four subsets must live in the same ground set")
    coverage = Counter(a for s in sets for a in s.elements)
    hist = Counter(coverage.values())
    return hist[1], hist[2], hist[3], hist[4]


def _check_cell(n: int, d: int, t: int) -> None:
    if not 0 <= t < d <= n:
        raise PreconditionError(f"need 0 <= t < d <= n, got n={n}, d={d}, t={t}")
    if 2 * d - t > n:
        raise PreconditionError(
            f"no pair of {d}-subsets of [{n}] meets in {t} elements (2d - t > n)"
        )


def default_base_pair(n: int, d: int, t: int) -> BasePair:
    """Lexicographically smallest (i0, j0) with |i0 & j0| = t."""
    _check_cell(n, d, t)
    i0 = SubsetIndex(tuple(range(d)), n)
    j0 = SubsetIndex(tuple(range(t)) + tuple(range(d, 2 * d - t)), n)
    return i0, j0


def random_base_pair(
    n: int, d: int, t: int, rng: RngStream, block: int = 0
) -> BasePair:
    """A uniformly random (i0, j0) with |i0 & j0| = t."""
    _check_cell(n, d, t)
    perm = [int(a) for a in rng.generator(block).permutation(n)]
    i0 = SubsetIndex(tuple(sorted(perm[:d])), n)
    j0 = SubsetIndex(tuple(sorted(perm[:t] + perm[d : 2 * d - t])), n)
    return i0, j0


def gamma_brute_histogram(
    n: int, d: int, t: int, base: Optional[BasePair] = None
) -> Dict[int, int]:
    """
    Enumerate every (k, l) against one base pair and bucket the admissible
    ones by s.

    Args:
        n: Ground set size
        d: Subset size
        t: Pair overlap |i & j| = |k & l|
        base: Base pair (i0, j0); the lexicographically smallest one by default

    Returns:
        Mapping s -> count, for the s values that occur

    Raises:
        ResourceCapError: If C(n, d)^2 exceeds ten million
    """
    _check_cell(n, d, t)
    pairs = binomial(n, d) ** 2
    if pairs > BRUTE_PAIR_CAP:
        raise ResourceCapError(
            f"C({n},{d})^2 = {pairs} pairs exceeds the enumeration cap "
            f"{BRUTE_PAIR_CAP}",
            cap_name="gamma_brute",
            cap_value=BRUTE_PAIR_CAP,
        )
    i0, j0 = base if base is not None else default_base_pair(n, d, t)
    if len(set(i0.elements) & set(j0.elements)) != t or i0.d != d or j0.d != d:
        raise PreconditionError(
            f"base pair {i0.elements}, {j0.elements} is not a (d={d}, t={t}) pair"
        )

    table = subset_table(n, d)
    indicator = np.zeros((table.shape[0], n), dtype=np.int8)
    np.put_along_axis(indicator, table, 1, axis=1)
    base_cover = np.zeros(n, dtype=np.int8)
    base_cover[list(i0.elements)] += 1
    base_cover[list(j0.elements)] += 1

    totals = np.zeros(2 * d + 1, dtype=np.int64)
    for row in indicator:
        overlap = indicator @ row
        cover = base_cover + row + indicator
        singles = np.count_nonzero(cover == 1, axis=1)
        ok = (overlap == t) & (singles == 0)
        if not np.any(ok):
            continue
        kept = cover[ok]
        triples = np.count_nonzero(kept == 3, axis=1)
        s = triples // 2 + np.count_nonzero(kept == 4, axis=1)
        totals += np.bincount(s, minlength=totals.size)[: totals.size]
    logger.debug("gamma histogram n=%d d=%d t=%d: %s", n, d, t, totals.tolist())
    return {s: int(c) for s, c in enumerate(totals) if c}


def gamma_brute(
    n: int, d: int, s: int, t: int, base: Optional[BasePair] = None
) -> int:
    """gamma(s, t) by full enumeration against one base pair."""
    if s < 0:
        raise PreconditionError(f"s must be >= 0, got {s}")
    return gamma_brute_histogram(n, d, t, base).get(s, 0)


def gamma_exact(n: int, d: int, s: int, t: int) -> int:
    """
    Closed form

        sum_{r=0}^{s} C(t, r) C(2(d-t), s-r) C(t-r, s-r) C(n-2d+t, t-s) C(2(d-t), d-t)

    for s <= t, and 0 for s > t.
    """
    _check_cell(n, d, t)
    if s < 0:
        raise PreconditionError(f"s must be >= 0, got {s}")
    if s > t:
        return 0
    free = 2 * (d - t)
    tail = math.comb(n - 2 * d + t, t - s) * math.comb(free, d - t)
    return tail * sum(
        math.comb(t, r) * math.comb(free, s - r) * math.comb(t - r, s - r)
        for r in range(s + 1)
    )


def gamma_bound(n: int, d: int, s: int, t: int) -> float:
    """2^{4(d-t)} C(n, d) C(t, s) 2^s (d/n)^{d-(t-s)} for s <= t, else 0."""
    if not 0 <= t < d <= n:
        raise PreconditionError(f"need 0 <= t < d <= n, got n={n}, d={d}, t={t}")
    if s < 0:
        raise PreconditionError(f"s must be >= 0, got {s}")
    if s > t:
        return 0.0
    log_value = (
        (4 * (d - t) + s) * math.log(2.0)
        + log_binomial(n, d)
        + math.log(math.comb(t, s))
        + (d - (t - s)) * math.log(d / n)
    )
    return math.exp(log_value)
