"""
The Marchenko-Pastur law with ratio rho.

mu_rho has density sqrt((a+ - x)(x - a-)) / (2 pi x rho) on [a-, a+] with
a+- = (1 +- sqrt(rho))^2, plus an atom of mass max(1 - 1/rho, 0) at zero.

The continuous part is integrated in the angle variable
x = a- cos^2(t) + a+ sin^2(t), which turns the square-root edges into the
smooth integrand (a+ - a-)^2 sin^2(t) cos^2(t) / (pi rho x(t)).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from ..core.errors import PreconditionError
from .spectra import ESD

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUANTILE_GRID = 20001


@dataclass(frozen=True)
class MPParams:
    """Marchenko-Pastur law parameters."""

    rho: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise PreconditionError(f"rho must be a positive real, got {self.rho}")
        object.__setattr__(self, "rho", float(self.rho))

    @classmethod
    def from_dimensions(cls, p: int, N: int) -> "MPParams":
        """Law for the realized aspect ratio p / N."""
        if p < 1 or N < 1:
            raise PreconditionError(f"p and N must be >= 1, got p={p}, N={N}")
        return cls(p / N)

    @property
    def a_minus(self) -> float:
        return (1.0 - math.sqrt(self.rho)) ** 2

    @property
    def a_plus(self) -> float:
        return (1.0 + math.sqrt(self.rho)) ** 2

    @property
    def atom_mass(self) -> float:
        return max(1.0 - 1.0 / self.rho, 0.0)

    @property
    def continuous_mass(self) -> float:
        return 1.0 - self.atom_mass


def density(x, mp: MPParams):
    """Density of the continuous part; zero at the edges and outside."""
    xs = np.asarray(x, dtype=np.float64)
    lo, hi = mp.a_minus, mp.a_plus
    inside = (xs > lo) & (xs < hi) & (xs > 0)
    safe = np.where(inside, xs, 0.5 * (lo + hi))
    values = np.sqrt((hi - safe) * (safe - lo)) / (2.0 * math.pi * safe * mp.rho)
    out = np.where(inside, values, 0.0)
    return float(out) if out.ndim == 0 else out


def _angle_integrand(theta, mp: MPParams):
    lo, hi = mp.a_minus, mp.a_plus
    s2 = np.sin(theta) ** 2
    c2 = np.cos(theta) ** 2
    x = lo * c2 + hi * s2
    # s2 / x tends to 1 / a+ at theta = 0 when a- = 0.
    ratio = np.divide(s2, x, out=np.full_like(s2, 1.0 / hi), where=x > 0)
    return (hi - lo) ** 2 * c2 * ratio / (math.pi * mp.rho)


def _angle_of(x: float, mp: MPParams) -> float:
    lo, hi = mp.a_minus, mp.a_plus
    frac = min(max((x - lo) / (hi - lo), 0.0), 1.0)
    return math.asin(math.sqrt(frac))


def _continuous_cdf(x: float, mp: MPParams) -> float:
    if x <= mp.a_minus:
        return 0.0
    if x >= mp.a_plus:
        return mp.continuous_mass
    top = _angle_of(x, mp)
    value, _ = quad(
        _angle_integrand, 0.0, top, args=(mp,), epsabs=QUAD_EPSABS, limit=200
    )
    return min(max(value, 0.0), mp.continuous_mass)


def cdf(x, mp: MPParams):
    """F(x) = atom 1(x >= 0) + integral of the density up to x."""
    xs = np.asarray(x, dtype=np.float64)
    flat = [
        (mp.atom_mass if v >= 0 else 0.0) + _continuous_cdf(float(v), mp)
        for v in xs.ravel()
    ]
    out = np.array(flat).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def cdf_left(x: float, mp: MPParams) -> float:
    """Left limit F(x-); differs from F(x) only at the atom."""
    value = cdf(x, mp)
    if x == 0:
        value -= mp.atom_mass
    return value


@lru_cache(maxsize=64)
def _quantile_table(rho: float) -> Tuple[np.ndarray, np.ndarray]:
    mp = MPParams(rho)
    theta = np.linspace(0.0, math.pi / 2, QUANTILE_GRID)
    mass = cumulative_trapezoid(_angle_integrand(theta, mp), theta, initial=0.0)
    mass *= mp.continuous_mass / mass[-1]
    x = mp.a_minus * np.cos(theta) ** 2 + mp.a_plus * np.sin(theta) ** 2
    logger.debug("built MP quantile table rho=%g on %d nodes", rho, QUANTILE_GRID)
    return mass, x


def quantile(u, mp: MPParams):
    """Generalized inverse of ``cdf``: inf{x: F(x) >= u} for u in [0, 1]."""
    us = np.asarray(u, dtype=np.float64)
    if np.any((us < 0) | (us > 1)):
        raise PreconditionError("quantile levels must lie in [0, 1]")
    mass, x = _quantile_table(mp.rho)
    cont = us - mp.atom_mass
    out = np.interp(np.clip(cont, 0.0, mp.continuous_mass), mass, x)
    if mp.atom_mass > 0:
        out = np.where(cont <= 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def stieltjes(z: complex, mp: MPParams) -> complex:
    """
    m(z) = integral dmu(x) / (x - z) for Im z > 0.

    m solves rho z m^2 + (z + rho - 1) m + 1 = 0; the root in the upper half
    plane is returned.
    """
    z = complex(z)
    if not z.imag > 0:
        raise PreconditionError(f"Stieltjes transform needs Im z > 0, got {z}")
    rho = mp.rho
    a = rho * z
    b = z + rho - 1.0
    disc = np.sqrt(complex(b * b - 4.0 * a))
    roots = ((-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a))
    return complex(max(roots, key=lambda m: m.imag))


def moment(k: int, mp: MPParams) -> float:
    """k-th moment, sum_j rho^j / (j + 1) C(k, j) C(k - 1, j)."""
    if k < 0:
        raise PreconditionError(f"moment order must be >= 0, got {k}")
    if k == 0:
        return 1.0
    return math.fsum(
        mp.rho**j / (j + 1) * math.comb(k, j) * math.comb(k - 1, j) for j in range(k)
    )


def ks_distance(esd: ESD, mp: MPParams) -> float:
    """
    sup_x |F_esd(x) - F_mp(x)|.

    Both functions are monotone and F_mp jumps only at zero, so the supremum
    is attained at an eigenvalue or at zero, from one side or the other.
    """
    points = np.unique(np.append(esd.eigenvalues, 0.0))
    right_mp = cdf(points, mp)
    left_mp = right_mp - np.where(points == 0, mp.atom_mass, 0.0)
    right_esd = esd.cdf(points)
    left_esd = esd.cdf_left(points)
    right_gap = np.max(np.abs(right_esd - right_mp))
    left_gap = np.max(np.abs(left_esd - left_mp))
    return float(max(right_gap, left_gap))


def wasserstein1(esd: ESD, mp: MPParams) -> float:
    """Mean |lambda_(k) - Q((k - 1/2) / p)| against the MP quantile function."""
    levels = (np.arange(esd.p) + 0.5) / esd.p
    return math.fsum(np.abs(esd.eigenvalues - quantile(levels, mp))) / esd.p
