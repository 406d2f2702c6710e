"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConvergenceError(ArithmeticError):
    """A numerical procedure did not reach its tolerance.

    ``result`` holds the best estimate available when the procedure gave up.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ResourceError(MemoryError):
    """A request would exceed a configured resource cap."""
