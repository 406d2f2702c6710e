"""Numerical reconstruction of the sieve constant behind D_{1,2}(N) >= 0.899 Theta(N)."""
from .errors import ConvergenceError, DomainError, ResourceError

__version__ = "0.1.0"
__all__ = ["ConvergenceError", "DomainError", "ResourceError", "__version__"]
