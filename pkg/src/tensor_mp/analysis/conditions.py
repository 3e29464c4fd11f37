"""
Truncated-moment conditions for MP convergence and the ESP law of large numbers.

For an entry law X the two terms are

    tail   = d E X^2 1(d X^2 > n)
    fourth = (d^2 / n) E X^4 1(d X^2 <= n)

and for a nonnegative Z the same with Z in place of X^2.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ..core.distributions import (
    EntryDistribution,
    SquaredEntryZ,
    TruncatedMoments,
    ZDistribution,
)
from ..core.errors import PreconditionError
from ..core.montecarlo import batch_mean
from ..core.rng import RngStream, map_blocks

logger = logging.getLogger(__name__)

DEFAULT_MC_REPS = 10**6
DEFAULT_BATCHES = 20
TREND_TOLERANCE = 0.1


class Method(Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "monte_carlo"


class Trend(Enum):
    ZERO = "zero"
    DECREASING = "decreasing"
    FLAT = "flat"
    INCREASING = "increasing"
    MIXED = "mixed"

    @property
    def vanishing(self) -> bool:
        return self in (Trend.ZERO, Trend.DECREASING)


@dataclass(frozen=True)
class ConditionReport:
    """
    Both condition terms plus the truncated moments they come from.

    ``lower_above + lower_below`` is E W = 1 for every supported law; the
    standard errors are zero for the analytic method.
    """

    term_truncated_tail: float
    term_truncated_fourth: float
    method: Method
    lower_above: float
    lower_below: float
    reps: int = 0
    tail_std_error: float = 0.0
    fourth_std_error: float = 0.0
    lower_below_std_error: float = 0.0

    @property
    def decomposition(self) -> float:
        return self.lower_above + self.lower_below


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _check_dn(d: int, n: int) -> None:
    if not 1 <= d <= n:
        raise PreconditionError(f"need 1 <= d <= n, got d={d}, n={n}")


def _analytic(moments: TruncatedMoments, d: int, n: int) -> ConditionReport:
    return ConditionReport(
        term_truncated_tail=d * moments.lower_above,
        term_truncated_fourth=(d * d / n) * moments.upper_below,
        method=Method.ANALYTIC,
        lower_above=moments.lower_above,
        lower_below=moments.lower_below,
    )


def _monte_carlo(
    sample_w: Sampler,
    d: int,
    n: int,
    reps: int,
    rng: RngStream,
    batches: int,
    threads: int,
) -> ConditionReport:
    if reps < 2 * batches or reps % batches:
        raise PreconditionError(f"reps={reps} must be a multiple of batches={batches}")
    threshold = n / d
    per_batch = reps // batches

    def work(b: int):
        w = sample_w(rng.generator(b), per_batch)
        below = w <= threshold
        return (
            np.where(below, 0.0, w),
            np.where(below, w, 0.0),
            np.where(below, w * w, 0.0),
        )

    parts = map_blocks(work, batches, threads)
    above = batch_mean([p[0] for p in parts])
    below = batch_mean([p[1] for p in parts])
    fourth = batch_mean([p[2] for p in parts])
    return ConditionReport(
        term_truncated_tail=d * above.point,
        term_truncated_fourth=(d * d / n) * fourth.point,
        method=Method.MONTE_CARLO,
        lower_above=above.point,
        lower_below=below.point,
        reps=reps,
        tail_std_error=d * above.std_error,
        fourth_std_error=(d * d / n) * fourth.std_error,
        lower_below_std_error=below.std_error,
    )


def _evaluate(
    moments: Optional[TruncatedMoments],
    sample_w: Sampler,
    d: int,
    n: int,
    method: Optional[Method],
    reps: int,
    rng: Optional[RngStream],
    batches: int,
    threads: int,
) -> ConditionReport:
    _check_dn(d, n)
    if method is None:
        method = Method.ANALYTIC if moments is not None else Method.MONTE_CARLO
    if method is Method.ANALYTIC:
        if moments is None:
            raise PreconditionError("no closed-form truncated moments for this law")
        return _analytic(moments, d, n)
    return _monte_carlo(sample_w, d, n, reps, rng or RngStream(0), batches, threads)


def condition14(
    dist: EntryDistribution,
    d: int,
    n: int,
    method: Optional[Method] = None,
    reps: int = DEFAULT_MC_REPS,
    rng: Optional[RngStream] = None,
    batches: int = DEFAULT_BATCHES,
    threads: int = 1,
) -> ConditionReport:
    """
    Truncated second and fourth moment terms of an entry law.

    Args:
        dist: Entry law
        d: Tensor order, 1 <= d <= n
        n: Base dimension
        method: Force analytic or Monte Carlo evaluation; by default the
            closed form is used whenever the law has one
        reps: Monte Carlo draws
        rng: Monte Carlo stream
        batches: Batch count for the standard errors
        threads: Worker cap for the batches

    Returns:
        ConditionReport
    """

    def sample_w(gen: np.random.Generator, size: int) -> np.ndarray:
        x = dist.sample(gen, size)
        return x * x

    _check_dn(d, n)
    moments = dist.truncated_moments(n / d)
    return _evaluate(moments, sample_w, d, n, method, reps, rng, batches, threads)


def condition_thm4(
    z_dist: ZDistribution,
    d: int,
    n: int,
    method: Optional[Method] = None,
    reps: int = DEFAULT_MC_REPS,
    rng: Optional[RngStream] = None,
    batches: int = DEFAULT_BATCHES,
    threads: int = 1,
) -> ConditionReport:
    """
    d E Z 1(dZ > n) and (d^2/n) E Z^2 1(dZ <= n) of a nonnegative law.

    For Z = X^2 this is ``condition14`` of X.
    """
    if isinstance(z_dist, SquaredEntryZ):
        return condition14(z_dist.entry, d, n, method, reps, rng, batches, threads)
    _check_dn(d, n)
    moments = z_dist.truncated_moments(n / d)
    return _evaluate(moments, z_dist.sample, d, n, method, reps, rng, batches, threads)


def classify_trend(values: Sequence[float], tol: float = TREND_TOLERANCE) -> Trend:
    """Finite-grid trend of a nonnegative sequence; no limit is claimed."""
    vals = [float(v) for v in values]
    if not vals:
        raise PreconditionError("cannot classify an empty sequence")
    if all(v == 0 for v in vals):
        return Trend.ZERO
    first, last = vals[0], vals[-1]
    steps_down = all(b <= a * (1.0 + tol) for a, b in zip(vals, vals[1:]))
    if first > 0 and last < first * (1.0 - tol) and steps_down:
        return Trend.DECREASING
    if first > 0 and abs(last - first) <= tol * first:
        return Trend.FLAT
    if last > first * (1.0 + tol):
        return Trend.INCREASING
    return Trend.MIXED


@dataclass(frozen=True)
class RegimeRow:
    n: int
    d: int
    law: str
    report: ConditionReport


@dataclass(frozen=True)
class RegimeTable:
    rows: List[RegimeRow] = field(default_factory=list)
    tail_trend: Trend = Trend.ZERO
    fourth_trend: Trend = Trend.ZERO

    @property
    def both_vanishing(self) -> bool:
        return self.tail_trend.vanishing and self.fourth_trend.vanishing


DistributionFamily = Union[
    EntryDistribution,
    ZDistribution,
    Callable[[int], Union[EntryDistribution, ZDistribution]],
]


def regime_classifier(
    dist: DistributionFamily,
    d_of_n: Callable[[int], int],
    n_grid: Sequence[int],
    method: Optional[Method] = None,
    reps: int = DEFAULT_MC_REPS,
    rng: Optional[RngStream] = None,
    threads: int = 1,
) -> RegimeTable:
    """
    Evaluate both condition terms along ``n_grid`` and classify their trends.

    Args:
        dist: A law, or a function of n returning the law at that n
        d_of_n: Order as a function of n, clamped into [1, n]
        n_grid: Strictly increasing dimensions
        method: As in ``condition14``
        reps: Monte Carlo draws per grid point
        rng: Base stream; grid point g uses stream id g
        threads: Worker cap for Monte Carlo batches

    Returns:
        RegimeTable with one row per grid point
    """
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError(f"n_grid must be nonempty and increasing: {grid}")
    base = rng or RngStream(0)
    rows = []
    for g, n in enumerate(grid):
        law = dist if _is_law(dist) else dist(n)
        d = min(max(int(d_of_n(n)), 1), n)
        stream = base.spawn(g)
        if isinstance(law, ZDistribution):
            report = condition_thm4(law, d, n, method, reps, stream, threads=threads)
        else:
            report = condition14(law, d, n, method, reps, stream, threads=threads)
        rows.append(RegimeRow(n, d, law.label, report))
        logger.debug("condition terms n=%d d=%d: %s", n, d, report)
    return RegimeTable(
        rows,
        classify_trend([r.report.term_truncated_tail for r in rows]),
        classify_trend([r.report.term_truncated_fourth for r in rows]),
    )


def _is_law(obj) -> bool:
    return isinstance(obj, (EntryDistribution, ZDistribution))
