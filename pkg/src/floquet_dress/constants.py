"""Physical constants (CODATA, SI) and atom records."""

from dataclasses import dataclass
import math

MU0 = 4e-7 * math.pi  # T m / A
MU_B = 9.2740100783e-24  # J / T
H_PLANCK = 6.62607015e-34  # J s
HBAR = H_PLANCK / (2 * math.pi)

GAUSS = 1e-4  # T
MICRON = 1e-6  # m
KHZ = 1e3
MA = 1e-3  # A


@dataclass(frozen=True)
class Atom:
    """Hyperfine manifold of a trapped atom.

    ``F`` may be a half-integer; ``g_F`` is signed.
    """

    F: float
    g_F: float
    mass: float

    @property
    def mu(self) -> float:
        """Signed magnetic moment mu_B g_F in J/T."""
        return MU_B * self.g_F

    @property
    def mu_over_h(self) -> float:
        """Signed mu/h in Hz/T."""
        return MU_B * self.g_F / H_PLANCK

    @property
    def sign(self) -> int:
        return 1 if self.g_F >= 0 else -1


RB87_F2 = Atom(F=2, g_F=0.5, mass=1.44316060e-25)
