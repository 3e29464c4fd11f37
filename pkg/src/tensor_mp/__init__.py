"""
tensor-mp

Description: Simulation and verification toolkit for the symmetric random
tensor sample-covariance model and its Marchenko-Pastur limit
"""

__version__ = "0.1.0"

from .core.errors import (
    BigCountOverflowError,
    EigenSolverError,
    InapplicableFormulaError,
    NonSymmetricMatrixError,
    PreconditionError,
    ResourceCapError,
    TensorMPError,
)
from .core.index_space import SubsetIndex, binomial, rank, unrank
from .core.distributions import parse_distribution, parse_z_distribution
from .core.rng import RngStream
from .core.tensor_model import TensorModelSpec, sample_covariance, vectorize
from .spectral.mp_law import MPParams
from .spectral.spectra import ESD, eigenvalues_sym
from .analysis.esp import esp_all, log_ustat, solve_rho

__all__ = [
    "__version__",
    # Errors
    "TensorMPError",
    "PreconditionError",
    "InapplicableFormulaError",
    "NonSymmetricMatrixError",
    "ResourceCapError",
    "BigCountOverflowError",
    "EigenSolverError",
    # Index space
    "SubsetIndex",
    "binomial",
    "rank",
    "unrank",
    # Model
    "parse_distribution",
    "parse_z_distribution",
    "RngStream",
    "TensorModelSpec",
    "sample_covariance",
    "vectorize",
    # Spectra
    "MPParams",
    "ESD",
    "eigenvalues_sym",
    # Symmetric polynomials
    "esp_all",
    "log_ustat",
    "solve_rho",
]
