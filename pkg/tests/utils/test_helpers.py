"""Tests for order-rule and grid parsers."""

import pytest

from tensor_mp.core.errors import PreconditionError
from tensor_mp.utils import clamp, parse_d_rule, parse_grid, parse_int_list


class TestOrderRules:
    @pytest.mark.parametrize(
        "text, n, expected",
        [
            ("floor(n^0.3)", 8000, 14),
            ("floor(2*n^0.5)", 100, 20),
            ("Floor( n ^ 0.5 )", 99, 9),
            ("const:3", 10, 3),
            ("sqrt-over-log", 100, 2),
            ("sqrt-over-log", 1, 1),
        ],
    )
    def test_values(self, text, n, expected):
        assert parse_d_rule(text)(n) == expected

    @pytest.mark.parametrize("text", ["log(n)", "const:x", "floor(n)"])
    def test_rejects(self, text):
        with pytest.raises(PreconditionError):
            parse_d_rule(text)


class TestGrids:
    def test_int_list(self):
        assert parse_int_list("500, 2000,8000") == [500, 2000, 8000]
        assert parse_int_list([1, 2]) == [1, 2]

    def test_bad_int_list(self):
        with pytest.raises(PreconditionError):
            parse_int_list("1,two")

    @pytest.mark.parametrize("value", ["", "0,5", "5,5", "9,3"])
    def test_bad_grid(self, value):
        with pytest.raises(PreconditionError):
            parse_grid(value)

    def test_clamp(self):
        assert clamp(9, 1, 4) == 4
        assert clamp(-2, 1, 4) == 1
        assert clamp(3, 1, 4) == 3
