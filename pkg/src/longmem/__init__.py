"""Semiparametric long-memory estimation under slowly varying spectral densities.

Submodules: svclass, models, simulate, spectral, gph, rates, lowerbound and
the command-line harness.
"""

__version__ = "0.1.0"

from .errors import (DomainError, EmbeddingError, FactorizationError, NoRootError,
                     NumericalError, QuadratureError)

__all__ = ["__version__", "DomainError", "NumericalError", "QuadratureError",
           "NoRootError", "EmbeddingError", "FactorizationError"]
