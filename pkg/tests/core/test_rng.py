"""Tests for reproducible streams and order-fixed reductions."""

import operator

import numpy as np
import pytest

from tensor_mp.core.errors import PreconditionError
from tensor_mp.core.rng import (
    RngStream,
    TreeReducer,
    block_bounds,
    map_blocks,
    map_reduce_blocks,
    tree_reduce,
)


class TestRngStream:
    """Substreams keyed by (seed, stream_id, block)."""

    def test_reproducible(self):
        a = RngStream(5, 3).generator(2).standard_normal(16)
        b = RngStream(5, 3).generator(2).standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_blocks_and_streams_differ(self):
        base = RngStream(5, 3).generator(0).standard_normal(8)
        other_block = RngStream(5, 3).generator(1).standard_normal(8)
        other_stream = RngStream(5, 4).generator(0).standard_normal(8)
        assert not np.array_equal(base, other_block)
        assert not np.array_equal(base, other_stream)

    def test_spawn(self):
        assert RngStream(9, 1).spawn(4) == RngStream(9, 4)

    def test_rejects_out_of_range_seed(self):
        with pytest.raises(PreconditionError):
            RngStream(-1)
        with pytest.raises(PreconditionError):
            RngStream(2**64)


class TestBlocks:
    def test_block_bounds(self):
        assert block_bounds(10, 4) == [range(0, 4), range(4, 8), range(8, 10)]
        assert block_bounds(0, 4) == []

    def test_block_bounds_rejects_zero(self):
        with pytest.raises(PreconditionError):
            block_bounds(10, 0)

    def test_map_blocks_keeps_order(self):
        assert map_blocks(lambda b: b * b, 9, threads=4) == [b * b for b in range(9)]


class TestTreeReduction:
    """The tree shape depends only on the item count."""

    def test_shape_of_three_and_four(self):
        pair = lambda a, b: (a, b)  # noqa: E731
        assert tree_reduce(["a", "b", "c"], pair) == (("a", "b"), "c")
        assert tree_reduce(["a", "b", "c", "d"], pair) == (("a", "b"), ("c", "d"))

    def test_order_preserved(self):
        assert tree_reduce(list("abcdefg"), operator.add) == "abcdefg"

    def test_streaming_matches_batch(self):
        reducer = TreeReducer(operator.add)
        for item in [0.1, 0.2, 0.3, 1e16, -1e16]:
            reducer.push(item)
        assert reducer.count == 5
        items = [0.1, 0.2, 0.3, 1e16, -1e16]
        assert reducer.result() == tree_reduce(items, operator.add)

    def test_empty(self):
        with pytest.raises(PreconditionError):
            TreeReducer(operator.add).result()

    @pytest.mark.parametrize("threads", [2, 3, 4, 8])
    def test_thread_count_invariance(self, threads):
        def block(b):
            return float(RngStream(11, 0).generator(b).standard_normal(1000).sum())

        serial = map_reduce_blocks(block, 13, operator.add, threads=1)
        assert map_reduce_blocks(block, 13, operator.add, threads=threads) == serial
