"""Perturbative Bogoliubov diagonalization to second order in lambda.

Implements the printed weak-coupling formulas verbatim:
    chi = -Einv C / 2,  upsilon = 2 chi,  upsilon1 = 4 Einv C Einv C,
    X = I + 2 lambda^2 chi^2,  Y = lambda upsilon + lambda^2 upsilon1,
and the second-order spectrum matrix whose eigenvalues are the
quasiparticle levels.  Note that the printed Y is generally not symmetric;
its asymmetry is reported as a diagnostic rather than symmetrized away.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import SystemMatrices
from .errors import ComplexSpectrumError, SingularSystemError

DEFAULT_IMAG_TOL = 1e-8
CONDITION_LIMIT = 1e12


def _einv_apply(sys: SystemMatrices, mat):
    # Einv is diagonal: row scaling, never an explicit inverse matrix product.
    return mat / sys.energies[:, None]


def shift_vector(sys: SystemMatrices, n0):
    """Shift z = -2 lambda sqrt(N0) (E + 6 lambda C)^{-1} d eliminating the
    linear terms, computed by a factorized linear solve."""
    lam = sys.lam
    if lam == 0.0:
        return np.zeros(sys.size)
    mat = np.diag(sys.energies) + 6.0 * lam * sys.coupling
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularSystemError(
            f"(E + 6*lambda*C) condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; "
            "lambda too large for this basis"
        )
    return -2.0 * lam * np.sqrt(n0) * np.linalg.solve(mat, sys.source)


def perturbative_xy(sys: SystemMatrices, order=2):
    """Weak-coupling X, Y and the expansion matrices (X, Y, chi, upsilon, upsilon1).

    order=1 keeps only the O(lambda) term of Y; order=2 adds the
    lambda^2 corrections to both X and Y.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    lam = sys.lam
    einv_c = _einv_apply(sys, sys.coupling)
    chi = -0.5 * einv_c
    upsilon = 2.0 * chi
    upsilon1 = 4.0 * einv_c @ einv_c
    eye = np.eye(sys.size)
    if order == 1:
        x = eye.copy()
        y = lam * upsilon
    else:
        x = eye + 2.0 * lam**2 * chi @ chi
        y = lam * upsilon + lam**2 * upsilon1
    return x, y, chi, upsilon, upsilon1


def spectrum_matrix(sys: SystemMatrices, order=2):
    """Spectrum matrix to O(lambda^order); order=1 is E + 4*lambda*C."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    lam = sys.lam
    result = np.diag(sys.energies) + 4.0 * lam * sys.coupling
    if order == 2:
        einv_c = _einv_apply(sys, sys.coupling)
        correction = (
            einv_c @ einv_c @ np.diag(sys.energies)
            - 3.0 * sys.coupling @ einv_c
            - 2.0 * _einv_apply(sys, sys.coupling @ sys.coupling)
        )
        result += 0.5 * lam**2 * correction
    return result


def first_order_levels(sys: SystemMatrices):
    """Diagonal level formula eps_n + 4*lambda*c_nn, sorted ascending."""
    return np.sort(sys.energies + 4.0 * sys.lam * np.diag(sys.coupling))


def quasiparticle_levels(mat, tol_imag=DEFAULT_IMAG_TOL):
    """Real eigenvalue spectrum of a (generally non-symmetric) matrix.

    Raises ComplexSpectrumError when max|Im| exceeds tol_imag * max|Re|,
    which signals a coupling beyond the perturbative regime.
    """
    if tol_imag <= 0.0:
        raise ValueError("tol_imag must be positive")
    eigenvalues = np.linalg.eigvals(np.asarray(mat, dtype=float))
    scale = np.max(np.abs(eigenvalues.real))
    max_imag = np.max(np.abs(eigenvalues.imag)) if eigenvalues.size else 0.0
    if max_imag > tol_imag * scale:
        raise ComplexSpectrumError(
            f"max |Im eigenvalue| = {max_imag:.3e} exceeds {tol_imag} * {scale:.3e}"
        )
    return np.sort(eigenvalues.real)


def constraint_residual(x, y):
    """Max-norm of X^2 - Y^2 - I."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.max(np.abs(x @ x - y @ y - np.eye(x.shape[0]))))


@dataclass
class PerturbativeSolution:
    """Perturbative diagonalization bundle for one SystemMatrices instance."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    chi: np.ndarray
    upsilon: np.ndarray
    upsilon1: np.ndarray
    spectrum: np.ndarray
    levels: np.ndarray
    order: int

    @property
    def y_asymmetry(self):
        """Max-norm of Y - Y^T; nonzero because the printed upsilon is
        -Einv C rather than a symmetrized form."""
        return float(np.max(np.abs(self.y - self.y.T)))


def solve_perturbative(sys: SystemMatrices, n0, order=2, tol_imag=DEFAULT_IMAG_TOL):
    """Full perturbative solution: shift vector, X/Y, spectrum, levels."""
    x, y, chi, upsilon, upsilon1 = perturbative_xy(sys, order=order)
    z = shift_vector(sys, n0)
    spec = spectrum_matrix(sys, order=order)
    levels = quasiparticle_levels(spec, tol_imag=tol_imag)
    if np.any(levels <= 0.0):
        warnings.warn(
            "non-positive quasiparticle level: coupling beyond the "
            "perturbative regime for this basis",
            RuntimeWarning,
            stacklevel=2,
        )
    return PerturbativeSolution(
        x=x, y=y, z=z, chi=chi, upsilon=upsilon, upsilon1=upsilon1,
        spectrum=spec, levels=levels, order=order,
    )
