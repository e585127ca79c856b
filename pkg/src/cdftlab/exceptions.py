"""Exception types shared across the package.

The CLI maps these onto its exit codes, so library code raises the most
specific type that applies instead of bare ValueError.
"""


class CdftLabError(Exception):
    """Base class for package errors."""


class ConfigError(CdftLabError):
    """Invalid run configuration (bad JSON, missing field, precondition)."""


class FieldFormatError(CdftLabError):
    """Malformed field file or mismatched grids on input."""


class RepresentationError(CdftLabError):
    """A density pair admits no usable representing state (density too
    small, normalization broken, or trusted region degenerate)."""


class InversionConsistencyError(CdftLabError):
    """Scalar-potential inversion found an imaginary residual too large for
    any real potential to make the state an eigenstate."""

    def __init__(self, residual: float, tol: float):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(
            f"imaginary residual {residual:.3e} exceeds tolerance {tol:.3e}; "
            "no real scalar potential makes this state an eigenstate"
        )


class ConvergenceError(CdftLabError):
    """Iterative eigensolver failed to reach the residual tolerance."""

    def __init__(self, message: str, residuals=None):
        self.residuals = list(residuals) if residuals is not None else []
        super().__init__(message)
