"""Non-perturbative solution of the coupled matrix Riccati system.

The equations
    X A Y + X B X + Y B Y = 0,
    Y A X + X B X + Y B Y = 0,
    X^2 - Y^2 - I = 0,
with A = E + 4*lambda*C and B = lambda*C are solved on the hyperbolic
ansatz X = cosh(T), Y = sinh(T), which satisfies the third equation
identically for any generator T.

Two branches are provided:

* symmetric=True (default): T symmetric, Newton on the symmetrized first
  equation.  This is the canonical Bogoliubov branch: the symmetric part
  of the first equation is exactly the coefficient of the anomalous
  operator pairs, the second equation is the transpose of the first, and
  the commutation constraint holds by construction.  The skew part of the
  printed equation does not vanish on this branch (it is O(lambda) and
  carries no operator content); it is reported separately.

* symmetric=False: general T, Newton on the full first equation.  This is
  the branch whose lambda-expansion reproduces the printed perturbative
  series (chi, upsilon, upsilon1) term by term, at the price of leaving
  the second equation unsatisfied at O(lambda).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.sparse.linalg import LinearOperator, lgmres

from .basis import SystemMatrices
from .errors import ConvergenceError, LineSearchError, NoSolutionError
from .perturbative import DEFAULT_IMAG_TOL, quasiparticle_levels

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
FD_STEP = 1e-7
DENSE_SIZE_LIMIT = 30


@dataclass(frozen=True)
class RiccatiProblem:
    """Coefficient matrices A = E + 4*lambda*C and B = lambda*C."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A and B must be square and congruent, got {a.shape}, {b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_system(cls, sys: SystemMatrices):
        return cls(
            a=np.diag(sys.energies) + 4.0 * sys.lam * sys.coupling,
            b=sys.lam * sys.coupling,
        )

    @property
    def size(self):
        return self.a.shape[0]

    def oscillator_energies(self):
        """Diagonal of E, recovered as diag(A - 4B)."""
        return np.diag(self.a - 4.0 * self.b)


def _equation1(x, y, prob):
    return x @ prob.a @ y + x @ prob.b @ x + y @ prob.b @ y


def _equation2(x, y, prob):
    return y @ prob.a @ x + x @ prob.b @ x + y @ prob.b @ y


def residuals(x, y, prob: RiccatiProblem):
    """Max-norms (r1, r2, r3) of the three printed matrix equations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r1 = float(np.max(np.abs(_equation1(x, y, prob))))
    r2 = float(np.max(np.abs(_equation2(x, y, prob))))
    r3 = float(np.max(np.abs(x @ x - y @ y - np.eye(x.shape[0]))))
    return r1, r2, r3


def anomalous_residuals(x, y, prob: RiccatiProblem):
    """Max-norms of the symmetric parts of the first two equations.

    These are the coefficients of the anomalous operator pairs (the
    operators commute, so only the symmetric part enters the Hamiltonian).
    """
    e1 = _equation1(x, y, prob)
    e2 = _equation2(x, y, prob)
    return (
        float(np.max(np.abs(0.5 * (e1 + e1.T)))),
        float(np.max(np.abs(0.5 * (e2 + e2.T)))),
    )


def solve_1x1(a, b):
    """Scalar oracle: x = cosh(t), y = sinh(t) with tanh(2t) = -2b/a."""
    if a == 0.0 or abs(2.0 * b / a) >= 1.0:
        raise NoSolutionError(f"|2b/a| = {abs(2 * b / a) if a else np.inf:.6g} >= 1")
    t = 0.5 * np.arctanh(-2.0 * b / a)
    return float(np.cosh(t)), float(np.sinh(t))


def _cosh_sinh_symmetric(t_mat):
    w, v = np.linalg.eigh(t_mat)
    return (v * np.cosh(w)) @ v.T, (v * np.sinh(w)) @ v.T


def _cosh_sinh_general(t_mat):
    ep = expm(t_mat)
    em = expm(-t_mat)
    return 0.5 * (ep + em), 0.5 * (ep - em)


def _asinh_series(y):
    # arcsinh(Y) to O(Y^7); ample for the weak-coupling init guesses.
    y2 = y @ y
    return y @ (np.eye(y.shape[0]) - y2 / 6.0 + 3.0 / 40.0 * y2 @ y2)


@dataclass
class RiccatiSolution:
    """Converged (or best-effort) solution of the Riccati system.

    r1, r2, r3 are the full-matrix residuals of the printed equations;
    anomalous_r1/anomalous_r2 their symmetric (operator-coefficient)
    parts.  `converged` certifies the branch target -- the anomalous
    residuals on the symmetric branch, the full first equation on the
    general branch -- together with r3; the skew part of the printed
    equations is O(lambda) on the symmetric branch and is not an error.
    """

    x: np.ndarray
    y: np.ndarray
    generator: np.ndarray
    symmetric: bool
    r1: float
    r2: float
    r3: float
    anomalous_r1: float
    anomalous_r2: float
    newton_residual: float
    iterations: int
    converged: bool
    max_r3_iterates: float


def _initial_generator(prob, init, symmetric):
    if init is not None:
        x0, y0 = init
        x0 = np.asarray(x0, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        r3 = float(np.max(np.abs(x0 @ x0 - y0 @ y0 - np.eye(prob.size))))
        if r3 >= 0.1:
            raise ValueError(f"init violates X^2 - Y^2 = I: residual {r3:.3g} >= 0.1")
        if symmetric:
            return _asinh_series(0.5 * (y0 + y0.T))
        return _asinh_series(y0)
    eps = prob.oscillator_energies()
    if symmetric:
        return -2.0 * prob.b / (eps[:, None] + eps[None, :])
    return -prob.b / eps[:, None]


def solve_xy(prob: RiccatiProblem, init=None, tol=DEFAULT_TOL,
             max_iter=DEFAULT_MAX_ITER, symmetric=True):
    """Newton iteration for X = cosh(T), Y = sinh(T).

    init: optional (X0, Y0) pair, e.g. from perturbative_xy; must satisfy
    the commutation constraint to within 0.1.  Defaults to the first-order
    perturbative generator.  Raises ConvergenceError (with best residuals
    attached) after max_iter, LineSearchError if backtracking stalls.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = prob.size
    iu = np.triu_indices(n)

    if symmetric:
        def unpack(vec):
            t_mat = np.zeros((n, n))
            t_mat[iu] = vec
            return t_mat + t_mat.T - np.diag(np.diag(t_mat))

        def residual_vec(vec):
            x, y = _cosh_sinh_symmetric(unpack(vec))
            e1 = _equation1(x, y, prob)
            return (0.5 * (e1 + e1.T))[iu]

        pack = lambda t_mat: t_mat[iu]
    else:
        def unpack(vec):
            return vec.reshape(n, n)

        def residual_vec(vec):
            x, y = _cosh_sinh_general(unpack(vec))
            return _equation1(x, y, prob).ravel()

        pack = lambda t_mat: t_mat.ravel()

    cosh_sinh = _cosh_sinh_symmetric if symmetric else _cosh_sinh_general

    t_vec = pack(_initial_generator(prob, init, symmetric))
    f_vec = residual_vec(t_vec)
    max_r3 = _constraint_of(t_vec, unpack, cosh_sinh, n)
    iterations = 0
    while float(np.max(np.abs(f_vec))) >= tol:
        if iterations >= max_iter:
            raise ConvergenceError(
                f"Newton did not reach {tol} in {max_iter} iterations",
                iterations=iterations,
                residual=float(np.max(np.abs(f_vec))),
            )
        step = _newton_step(residual_vec, t_vec, f_vec)
        t_vec, f_vec = _line_search(residual_vec, t_vec, f_vec, step)
        max_r3 = max(max_r3, _constraint_of(t_vec, unpack, cosh_sinh, n))
        iterations += 1

    t_mat = unpack(t_vec)
    x, y = cosh_sinh(t_mat)
    r1, r2, r3 = residuals(x, y, prob)
    an1, an2 = anomalous_residuals(x, y, prob)
    return RiccatiSolution(
        x=x, y=y, generator=t_mat, symmetric=symmetric,
        r1=r1, r2=r2, r3=r3, anomalous_r1=an1, anomalous_r2=an2,
        newton_residual=float(np.max(np.abs(f_vec))),
        iterations=iterations, converged=True, max_r3_iterates=max(max_r3, r3),
    )


def _constraint_of(t_vec, unpack, cosh_sinh, n):
    x, y = cosh_sinh(unpack(t_vec))
    return float(np.max(np.abs(x @ x - y @ y - np.eye(n))))


def _newton_step(residual_vec, t_vec, f_vec):
    # Dense finite-difference Jacobian up to basis size ~30 (900 parameters
    # for a general generator), matrix-free Krylov above.
    m = t_vec.size
    if m <= DENSE_SIZE_LIMIT**2:
        jac = np.empty((m, m))
        for k in range(m):
            bumped = t_vec.copy()
            bumped[k] += FD_STEP
            jac[:, k] = (residual_vec(bumped) - f_vec) / FD_STEP
        return np.linalg.solve(jac, -f_vec)

    def matvec(vec):
        scale = FD_STEP / max(1.0, float(np.linalg.norm(vec)))
        return (residual_vec(t_vec + scale * vec) - f_vec) / scale

    op = LinearOperator((m, m), matvec=matvec)
    step, info = lgmres(op, -f_vec, rtol=1e-8, atol=0.0, maxiter=400)
    if info != 0:
        raise ConvergenceError(f"inner Krylov solve failed (info={info})")
    return step


def _line_search(residual_vec, t_vec, f_vec, step):
    norm0 = float(np.linalg.norm(f_vec))
    alpha = 1.0
    while alpha >= 1e-10:
        trial = t_vec + alpha * step
        f_trial = residual_vec(trial)
        if float(np.linalg.norm(f_trial)) < (1.0 - 1e-4 * alpha) * norm0:
            return trial, f_trial
        alpha *= 0.5
    raise LineSearchError("backtracking found no residual decrease", residual=norm0)


def exact_spectrum(sol: RiccatiSolution, sys: SystemMatrices, tol_imag=DEFAULT_IMAG_TOL):
    """Quasiparticle levels from the converged X, Y.

    Assembles X E X + Y E Y + 4 lambda (X C X + Y C Y) + 2 lambda (X C Y + Y C X)
    and returns its eigenvalues sorted ascending.
    """
    if not sol.converged:
        raise ValueError("spectrum requested from a non-converged solution")
    x, y = sol.x, sol.y
    lam = sys.lam
    e_mat = np.diag(sys.energies)
    c_mat = sys.coupling
    spec = (
        x @ e_mat @ x + y @ e_mat @ y
        + 4.0 * lam * (x @ c_mat @ x + y @ c_mat @ y)
        + 2.0 * lam * (x @ c_mat @ y + y @ c_mat @ x)
    )
    return quasiparticle_levels(spec, tol_imag=tol_imag)
