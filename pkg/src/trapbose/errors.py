"""Exception types shared across the package."""


class TrapBoseError(Exception):
    """Base class for all package errors."""


class ConfigError(TrapBoseError):
    """Invalid physical or run configuration."""


class CommensurateFrequenciesError(ConfigError):
    """Trap frequencies have a (near-)rational ratio; degenerate levels unsupported."""


class EmptyBasisError(TrapBoseError):
    """No excited state lies below the requested energy cutoff."""


class IndexTooLargeError(TrapBoseError):
    """Quantum number beyond the quadrature-order guard."""


class SingularSystemError(TrapBoseError):
    """Linear system too ill-conditioned to solve reliably."""


class ComplexSpectrumError(TrapBoseError):
    """Eigenvalues have imaginary parts above tolerance."""


class NoSolutionError(TrapBoseError):
    """Scalar Bogoliubov problem has no real hyperbolic solution."""


class ConvergenceError(TrapBoseError):
    """Iterative solver failed to converge."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class LineSearchError(ConvergenceError):
    """Backtracking line search could not reduce the residual."""
