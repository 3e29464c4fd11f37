"""
Helper utilities for tensor-mp: parsers for order rules and dimension grids.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, List, Sequence, Union

from ..core.errors import PreconditionError

_FLOOR_POWER = re.compile(
    r"^floor\(\s*(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?n\s*\^\s*(?P<a>[0-9.eE+-]+)\s*\)$"
)


@dataclass(frozen=True)
class DRule:
    """
    Tensor order as a function of n.

    Accepted expressions:
        floor(n^a), floor(c*n^a), const:k, sqrt-over-log
    """

    expr: str
    fn: Callable[[int], int]

    def __call__(self, n: int) -> int:
        return self.fn(n)


def _sqrt_over_log(n: int) -> int:
    if n < 2:
        return 1
    return math.floor(math.sqrt(n) / math.log(n))


def parse_d_rule(text: str) -> DRule:
    """
    Parse an order rule.

    Args:
        text: Rule expression, e.g. ``floor(n^0.3)`` or ``const:2``

    Returns:
        DRule; values are not clamped here

    Raises:
        PreconditionError: If the expression is not recognised
    """
    expr = text.strip().lower().replace(" ", "")
    if expr.startswith("const:"):
        try:
            k = int(expr.split(":", 1)[1])
        except ValueError as exc:
            raise PreconditionError(f"bad constant order rule {text!r}") from exc
        return DRule(expr, lambda n: k)
    if expr in ("sqrt-over-log", "sqrt(n)/log(n)"):
        return DRule(expr, _sqrt_over_log)
    match = _FLOOR_POWER.match(expr)
    if match:
        try:
            c = float(match.group("c")) if match.group("c") else 1.0
            a = float(match.group("a"))
        except ValueError as exc:
            raise PreconditionError(f"bad order rule {text!r}") from exc
        return DRule(expr, lambda n: math.floor(c * n**a))
    raise PreconditionError(
        f"unknown order rule {text!r}; use floor(n^a), floor(c*n^a), const:k "
        "or sqrt-over-log"
    )


def clamp(value: int, lo: int, hi: int) -> int:
    return min(max(int(value), lo), hi)


def parse_int_list(value: Union[str, Sequence[int]]) -> List[int]:
    """Parse ``"500,2000,8000"`` (or pass a list through) into ints."""
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
        try:
            return [int(p) for p in parts]
        except ValueError as exc:
            raise PreconditionError(f"bad integer list {value!r}") from exc
    return [int(v) for v in value]


def parse_grid(value: Union[str, Sequence[int]]) -> List[int]:
    """An increasing grid of positive dimensions."""
    grid = parse_int_list(value)
    if not grid:
        raise PreconditionError("grid must not be empty")
    if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError(
            f"grid must be positive and strictly increasing: {grid}"
        )
    return grid
