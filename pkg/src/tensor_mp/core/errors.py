"""
Exception hierarchy for tensor-mp.

Precondition failures subclass ``ValueError`` so callers that only know the
builtin contract keep working.
"""


class TensorMPError(Exception):
    """Base class for all tensor-mp errors."""


class PreconditionError(TensorMPError, ValueError):
    """An operation was called outside its documented domain."""


class InapplicableFormulaError(PreconditionError):
    """An asymptotic formula was requested where its hypotheses fail."""


class NonSymmetricMatrixError(PreconditionError):
    """A symmetric-only routine received a non-symmetric matrix."""


class ResourceCapError(TensorMPError):
    """A configured size cap (dense storage, enumeration) was exceeded."""

    def __init__(self, message: str, cap_name: str = "", cap_value: int = 0):
        super().__init__(message)
        self.cap_name = cap_name
        self.cap_value = cap_value


class BigCountOverflowError(ResourceCapError, OverflowError):
    """An exact count does not fit the requested fixed-width representation."""


class EigenSolverError(TensorMPError, ArithmeticError):
    """The symmetric eigensolver failed to converge or broke its residual contract."""

    def __init__(self, message: str, index: int = -1):
        super().__init__(message)
        self.index = index
