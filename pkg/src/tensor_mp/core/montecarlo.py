"""Batch-means estimators with distribution-free standard errors."""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class MeanEstimate:
    """Monte Carlo mean with a batch-means standard error."""

    point: float
    std_error: float
    reps: int
    batches: int


@dataclass(frozen=True)
class VarEstimate:
    """Monte Carlo variance; std_error comes from per-batch variance estimates."""

    point: float
    std_error: float
    reps: int
    batches: int

    def within(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.point - target) <= sigmas * self.std_error


def _stack(batches: Sequence[np.ndarray]) -> list:
    if len(batches) < 2:
        raise PreconditionError("batch estimators need at least two batches")
    sizes = {len(b) for b in batches}
    if len(sizes) != 1 or 0 in sizes:
        raise PreconditionError(f"batches must be nonempty and equal-sized: {sizes}")
    return [np.asarray(b, dtype=np.float64) for b in batches]


def batch_mean(batches: Sequence[np.ndarray]) -> MeanEstimate:
    """Mean over equal-sized batches; SE is the spread of the batch means."""
    arrays = _stack(batches)
    means = np.array([math.fsum(b) / len(b) for b in arrays])
    point = math.fsum(means) / len(means)
    se = float(np.std(means, ddof=1)) / math.sqrt(len(means))
    return MeanEstimate(point, se, sum(len(b) for b in arrays), len(arrays))


def batch_variance(batches: Sequence[np.ndarray]) -> VarEstimate:
    """
    Unbiased variance of the pooled sample.

    The standard error is the spread of the per-batch unbiased variances
    divided by sqrt(batches), which avoids any eighth-moment assumption.
    """
    arrays = _stack(batches)
    pooled = np.concatenate(arrays)
    if len(pooled) < 2:
        raise PreconditionError("need at least two replicates")
    point = float(np.var(pooled, ddof=1))
    per_batch = np.array([np.var(b, ddof=1) if len(b) > 1 else 0.0 for b in arrays])
    se = float(np.std(per_batch, ddof=1)) / math.sqrt(len(arrays))
    return VarEstimate(max(point, 0.0), se, len(pooled), len(arrays))
