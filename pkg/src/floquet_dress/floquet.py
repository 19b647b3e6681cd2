"""Independent Floquet oracle: one-period propagator of the bare spin.

The (2F+1)-dimensional Schroedinger equation is integrated in the lab frame
with H(t) = (mu/h) [B_S + Re(B_rf exp(i w t))] . F, without any photon basis.
Quasi-energies follow from the eigenphases of the monodromy matrix.
"""

from dataclasses import dataclass

import numpy as np

from .constants import Atom
from .errors import IntegrationFailureError, InvalidArgumentError
from .spin import spin_matrices

UNITARITY_TOL = 1e-9
START_STEPS = 1024
MAX_STEPS = 1 << 17


@dataclass(frozen=True, eq=False)
class OracleResult:
    quasi_energies: np.ndarray  # Hz, sorted, in (-nu/2, nu/2]
    monodromy: np.ndarray
    steps: int
    unitarity_defect: float


def wrap(energies, nu):
    """Map frequencies into (-nu/2, nu/2]."""
    e = np.asarray(energies, float)
    w = e - nu * np.round(e / nu)
    return np.where(w <= -0.5 * nu, w + nu, w)


def circular_distance(a, b, nu):
    d = np.abs(wrap(np.asarray(a, float) - np.asarray(b, float), nu))
    return d


def _step_products(A, C, S, omega, T, n):
    """RK4 one-step propagators P_k for dU/dt = -2 pi i H(t) U, stacked."""
    h = T / n
    t = np.arange(n) * h
    d = A.shape[0]
    eye = np.eye(d)

    def gen(tt):
        # -2 pi i H(t) for an array of times
        return -2j * np.pi * (A[None] + np.cos(omega * tt)[:, None, None] * C[None]
                              + np.sin(omega * tt)[:, None, None] * S[None])

    k1 = gen(t)
    k2 = gen(t + 0.5 * h)
    k4 = gen(t + h)
    # RK4 applied to a linear system, written as a propagator polynomial
    k2k1 = k2 @ k1
    k2k2k1 = k2 @ k2k1
    P = (eye + h / 6 * (k1 + 4 * k2 + k4)
         + h**2 / 6 * (k2k1 + k2 @ k2 + k4 @ k2)
         + h**3 / 12 * (k2k2k1 + k4 @ k2 @ k2)
         + h**4 / 24 * (k4 @ k2k2k1))
    return P


def _ordered_product(P):
    """P[n-1] ... P[1] P[0] by pairwise reduction (n a power of two)."""
    while len(P) > 1:
        if len(P) % 2:
            P = np.concatenate([P, np.eye(P.shape[1])[None]], axis=0)
        P = P[1::2] @ P[0::2]
    return P[0]


def monodromy(atom: Atom, B_static, B_rf, nu_rf, steps):
    s = spin_matrices(atom.F)
    mu_h = atom.mu_over_h
    Bs = np.asarray(B_static, float)
    Br = np.asarray(B_rf, complex)
    # Re[B e^{iwt}] = Re(B) cos wt - Im(B) sin wt
    A = mu_h * (Bs[0] * s.Fx + Bs[1] * s.Fy + Bs[2] * s.Fz)
    C = mu_h * (Br.real[0] * s.Fx + Br.real[1] * s.Fy + Br.real[2] * s.Fz)
    S = -mu_h * (Br.imag[0] * s.Fx + Br.imag[1] * s.Fy + Br.imag[2] * s.Fz)
    T = 1.0 / nu_rf
    return _ordered_product(_step_products(A, C, S, 2 * np.pi * nu_rf, T, steps))


def quasi_energies(atom: Atom, B_static, B_rf, nu_rf, start_steps=START_STEPS, max_steps=MAX_STEPS):
    """Quasi-energies (Hz, mod nu_rf) of the driven spin.

    The step count doubles until ||U^dag U - 1|| <= 1e-9.
    """
    if not nu_rf > 0:
        raise InvalidArgumentError("drive frequency must be positive")
    steps = int(start_steps)
    while True:
        U = monodromy(atom, B_static, B_rf, nu_rf, steps)
        defect = float(np.linalg.norm(U.conj().T @ U - np.eye(len(U)), 2))
        if defect <= UNITARITY_TOL:
            break
        if steps >= max_steps:
            raise IntegrationFailureError(f"unitarity defect {defect:.2e} after {steps} steps", residual=defect)
        steps *= 2
    phases = np.angle(np.linalg.eigvals(U))
    q = np.sort(wrap(-phases * nu_rf / (2 * np.pi), nu_rf))
    return OracleResult(q, U, steps, defect)


def floquet_oracle(scenario, point):
    """Quasi-energies (Hz, sorted, in (-nu/2, nu/2]) at ``point``."""
    s = scenario.sample(point)
    return quasi_energies(scenario.atom, s.B_static, s.B_rf, scenario.nu_rf).quasi_energies


def converged_mask(vectors, basis, margin=2, tol=1e-8):
    """Eigenvectors with negligible weight within ``margin`` photon numbers of the cutoff."""
    edge = np.abs(basis.dN) > basis.dN_max - margin
    return (np.abs(np.asarray(vectors)[edge, :]) ** 2).sum(axis=0) < tol


def oracle_mismatch(energies, quasi, nu_rf):
    """Largest circular distance, relative to ``nu_rf``, between the two sets
    (each dressed energy to its nearest quasi-energy and vice versa)."""
    e = np.asarray(energies, float)
    q = np.asarray(quasi, float)
    if not len(e) or not len(q):
        raise InvalidArgumentError("nothing to compare")
    D = circular_distance(e[:, None], q[None, :], nu_rf)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()) / nu_rf)
