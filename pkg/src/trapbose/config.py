"""Physical configuration of the trapped Bose gas."""

import math
from dataclasses import dataclass

from .errors import CommensurateFrequenciesError, ConfigError

# Commensurability scan: reject omega_i/omega_j within this distance of p/q,
# p, q <= COMMENSURATE_MAX_INT.  Degenerate level bookkeeping is unsupported.
COMMENSURATE_TOL = 1e-9
COMMENSURATE_MAX_INT = 12


@dataclass(frozen=True)
class TrapConfig:
    """Parameters of one model instance: D-dimensional harmonic trap with
    contact interaction g*delta(x) among N bosons of mass m.

    Frequencies are in oscillator units; with the defaults
    (hbar = omega = 1, m = 2*pi^2, N = 1000, g = 0.0002) the matrix-element
    prefactor (m*omega / 2*pi^2*hbar)^(D/2) equals one.
    """

    dimension: int = 1
    frequencies: tuple = (1.0,)
    mass: float = 2.0 * math.pi**2
    hbar: float = 1.0
    g: float = 2e-4
    n_particles: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if len(self.frequencies) != self.dimension:
            raise ConfigError(
                f"expected {self.dimension} frequencies, got {len(self.frequencies)}"
            )
        if any(w <= 0.0 for w in self.frequencies):
            raise ConfigError("all trap frequencies must be positive")
        if self.mass <= 0.0:
            raise ConfigError("mass must be positive")
        if self.hbar <= 0.0:
            raise ConfigError("hbar must be positive")
        if self.g < 0.0:
            raise ConfigError("interaction strength g must be >= 0")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        self._check_commensurability()

    def _check_commensurability(self):
        for i in range(self.dimension):
            for j in range(self.dimension):
                if i == j:
                    continue
                ratio = self.frequencies[i] / self.frequencies[j]
                for q in range(1, COMMENSURATE_MAX_INT + 1):
                    p = round(ratio * q)
                    if p < 1 or p > COMMENSURATE_MAX_INT:
                        continue
                    if abs(ratio - p / q) < COMMENSURATE_TOL:
                        raise CommensurateFrequenciesError(
                            f"frequency ratio omega_{i + 1}/omega_{j + 1} = {ratio!r} "
                            f"is within {COMMENSURATE_TOL} of {p}/{q}; "
                            "degenerate traps are unsupported"
                        )

    @property
    def omega_mean(self):
        """Geometric-mean frequency (omega_1 ... omega_D)^(1/D)."""
        log_sum = sum(math.log(w) for w in self.frequencies)
        return math.exp(log_sum / self.dimension)

    def coupling_lambda(self, n0):
        """Effective coupling lambda = g*N0/2 at condensate occupation n0."""
        return 0.5 * self.g * n0
