"""Bogoliubov matrix method for weakly-interacting bosons in a harmonic trap.

Pipeline: truncated oscillator basis -> quadratic-Hamiltonian matrices ->
quasiparticle spectrum (perturbative or matrix-Riccati) -> self-consistent
condensate fraction and energy versus temperature.
"""

from .basis import (
    BasisSet,
    SystemMatrices,
    build_matrices,
    coupling_coefficient,
    diagonal_coupling,
    enumerate_basis,
    oscillator_energy,
    quadrature_oracle_element,
    source_coefficient,
)
from .config import TrapConfig
from .errors import (
    CommensurateFrequenciesError,
    ComplexSpectrumError,
    ConfigError,
    ConvergenceError,
    EmptyBasisError,
    IndexTooLargeError,
    LineSearchError,
    NoSolutionError,
    SingularSystemError,
    TrapBoseError,
)
from .perturbative import (
    PerturbativeSolution,
    constraint_residual,
    first_order_levels,
    perturbative_xy,
    quasiparticle_levels,
    shift_vector,
    solve_perturbative,
    spectrum_matrix,
)
from .riccati import (
    RiccatiProblem,
    RiccatiSolution,
    anomalous_residuals,
    exact_spectrum,
    residuals,
    solve_1x1,
    solve_xy,
)
from .thermo import (
    SpectrumModel,
    ThermoCurve,
    ThermoPoint,
    energy_excess,
    excited_count,
    occupation,
    solve_n0,
    sweep,
)

__version__ = "0.1.0"
