"""
Utility functions for tensor-mp.
"""

from .helpers import DRule, clamp, parse_d_rule, parse_grid, parse_int_list

__all__ = ["DRule", "clamp", "parse_d_rule", "parse_grid", "parse_int_list"]
