"""Symmetric polynomials, quadratic-form concentration, counting and conditions."""
