"""Exception hierarchy.

Validation problems (bad arguments, out-of-domain inputs) derive from
``ValueError``; numerical failures derive from ``NumericalError`` so the CLI
can map them to distinct exit codes.
"""


class DomainError(ValueError):
    """Argument outside the domain of the operation."""


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical procedure."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NoRootError(NumericalError):
    """The defining equation for the critical scale has no root in (0, pi]."""


class EmbeddingError(NumericalError):
    """Circulant embedding carries too much negative spectral mass."""

    def __init__(self, message, negative_mass=None):
        super().__init__(message)
        self.negative_mass = negative_mass


class FactorizationError(NumericalError):
    """Cholesky factorization of a Toeplitz covariance failed."""

    def __init__(self, message, minor=None):
        super().__init__(message)
        self.minor = minor
