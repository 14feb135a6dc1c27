"""Exception types shared across the package."""


class CisimError(Exception):
    """Base class for all package errors."""


class DuplicateOrbital(CisimError):
    """An orbital index appears more than once in a determinant."""


class IndexOutOfRange(CisimError):
    """An orbital index lies outside [1, N]."""


class InvalidCounts(CisimError):
    """Electron/orbital counts are inconsistent (eta < 1 or eta > N)."""


class BoundViolated(CisimError):
    """A certified basis bound fails at some sampled point."""

    def __init__(self, message, orbital=None, location=None, quantity=None):
        super().__init__(message)
        self.orbital = orbital
        self.location = location
        self.quantity = quantity


class UnsupportedAngularMomentum(CisimError):
    """Cartesian powers beyond d functions are not supported."""


class DeltaTooLarge(CisimError):
    """Requested quadrature error exceeds the admissible range."""


class DeltaTooSmall(CisimError):
    """Requested quadrature error needs a grid beyond the configured cap."""


class SpecMismatch(CisimError):
    """Two Riemann term lists were built from incompatible plans."""


class MalformedGamma(CisimError):
    """A one-sparse term label violates its structural constraints."""


class TooManyDifferences(CisimError):
    """Determinants differ in more than two orbitals."""


class PatternMismatch(CisimError):
    """A matrix does not fit the sparsity pattern of its parent."""


class BudgetInfeasible(CisimError):
    """The requested total error cannot be split into positive budgets."""


class DimensionTooLarge(CisimError):
    """Dense reference evolution was requested beyond the supported size."""


class NonOrthonormalBasisWarning(UserWarning):
    """The overlap matrix of the ingested basis deviates from identity."""
