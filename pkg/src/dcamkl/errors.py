"""Exception hierarchy shared across the package."""


class DcamklError(Exception):
    """Base class for all package errors."""


class ValidationError(DcamklError):
    """Input violates a documented precondition or invariant."""


class ParseError(DcamklError):
    """A file could not be parsed (malformed row, bad literal, ...)."""


class DegenerateFusionError(DcamklError):
    """Fusion cannot proceed (zero between-class scatter or vanishing
    between-set covariance)."""


class NonConvergenceError(DcamklError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
