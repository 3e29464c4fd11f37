"""
Counter-based random streams and order-fixed parallel reduction.

Every block of samples is drawn from its own Philox generator keyed by
``(seed, stream_id, block)``, so blocks can be produced in any order or on any
number of threads and still give identical results.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Sequence, Tuple, TypeVar

import numpy as np

from .errors import PreconditionError

logger = logging.getLogger(__name__)

T = TypeVar("T")

UINT64_LIMIT = 2**64

# Stream-id namespaces used by the experiments.
SAMPLE_STREAMS = 0
MATRIX_STREAMS = 1 << 32


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < UINT64_LIMIT:
                raise PreconditionError(
                    f"{name} must be a 64-bit unsigned int: {value}"
                )

    def generator(self, block: int = 0) -> np.random.Generator:
        """Generator for one block of this stream."""
        seq = np.random.SeedSequence(
            entropy=int(self.seed), spawn_key=(int(self.stream_id), int(block))
        )
        return np.random.Generator(np.random.Philox(seq))

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def block_bounds(total: int, block_size: int) -> List[range]:
    """Split ``range(total)`` into consecutive blocks of at most block_size."""
    if block_size < 1:
        raise PreconditionError(f"block_size must be >= 1, got {block_size}")
    return [
        range(start, min(start + block_size, total))
        for start in range(0, total, block_size)
    ]


def map_blocks(fn: Callable[[int], T], n_blocks: int, threads: int = 1) -> List[T]:
    """
    Evaluate ``fn(block)`` for every block index, results in block order.

    Args:
        fn: Work function of the block index
        n_blocks: Number of blocks
        threads: Worker cap; 1 runs inline

    Returns:
        List of results ordered by block index
    """
    if threads < 1:
        raise PreconditionError(f"threads must be >= 1, got {threads}")
    if threads == 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_blocks)))


class TreeReducer(Generic[T]):
    """
    Streaming pairwise reduction.

    Items are pushed in order and merged like a binary counter, so the shape of
    the reduction tree depends only on how many items were pushed and at most
    log2(count) partial results are alive at once.
    """

    def __init__(self, combine: Callable[[T, T], T]):
        self._combine = combine
        self._stack: List[Tuple[int, T]] = []
        self.count = 0

    def push(self, item: T) -> None:
        level = 0
        while self._stack and self._stack[-1][0] == level:
            _, left = self._stack.pop()
            item = self._combine(left, item)
            level += 1
        self._stack.append((level, item))
        self.count += 1

    def result(self) -> T:
        if not self._stack:
            raise PreconditionError("cannot reduce an empty sequence")
        _, acc = self._stack[-1]
        for _, left in reversed(self._stack[:-1]):
            acc = self._combine(left, acc)
        return acc


def tree_reduce(items: Sequence[T], combine: Callable[[T, T], T]) -> T:
    """Reduce ``items`` with a ``TreeReducer``."""
    reducer: TreeReducer[T] = TreeReducer(combine)
    for item in items:
        reducer.push(item)
    return reducer.result()


def map_reduce_blocks(
    fn: Callable[[int], T],
    n_blocks: int,
    combine: Callable[[T, T], T],
    threads: int = 1,
) -> T:
    """
    Evaluate blocks in windows of ``threads`` and fold them into a tree.

    The result is bit-identical for every thread count since block contents
    depend only on the block index and the tree shape only on n_blocks.
    """
    if threads < 1:
        raise PreconditionError(f"threads must be >= 1, got {threads}")
    reducer: TreeReducer[T] = TreeReducer(combine)
    if threads == 1:
        for b in range(n_blocks):
            reducer.push(fn(b))
        return reducer.result()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, n_blocks, threads):
            window = range(start, min(start + threads, n_blocks))
            for partial in pool.map(fn, window):
                reducer.push(partial)
    logger.debug("reduced %d blocks on %d threads", n_blocks, threads)
    return reducer.result()
