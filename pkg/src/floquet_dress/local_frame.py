"""Decomposition of RF phasors relative to the local static field direction."""

from dataclasses import dataclass

import numpy as np

from .constants import H_PLANCK, Atom
from .errors import DegenerateFrameError

_REFERENCE_AXES = (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
_MIN_FIELD = 1e-12  # T
_COLINEAR = 1e-8


@dataclass(frozen=True, eq=False)
class LocalFrame:
    b_hat: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    B_par: complex
    B_perp1: complex
    B_perp2: complex

    @property
    def components(self):
        """Phasor components along (e1, e2, b_hat), matching (Fx, Fy, Fz)."""
        return np.array([self.B_perp1, self.B_perp2, self.B_par], dtype=complex)

    def project(self, phasor):
        """Components of another phasor in this frame, ordered like ``components``."""
        phasor = np.asarray(phasor, dtype=complex)
        return np.array([phasor @ self.e1, phasor @ self.e2, phasor @ self.b_hat])


@dataclass(frozen=True)
class RwaParams:
    detuning: float  # Hz
    rabi: float  # Hz
    larmor: float  # Hz


def triad(B_static):
    B = np.asarray(B_static, dtype=float)
    n = np.linalg.norm(B)
    if not n > _MIN_FIELD:
        raise DegenerateFrameError(f"static field {n:.3g} T too small to define a quantization axis")
    b = B / n
    for ref in _REFERENCE_AXES:
        e1 = ref - b * (ref @ b)
        if np.linalg.norm(e1) > _COLINEAR:
            break
    e1 = e1 / np.linalg.norm(e1)
    # second pass: the first loses orthogonality when ref is nearly parallel to b
    e1 = e1 - b * (e1 @ b)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(b, e1)
    return b, e1, e2


def decompose(B_static, phasor) -> LocalFrame:
    """Split ``phasor`` into parts parallel and perpendicular to ``B_static``.

    e1 is the projection of x onto the plane normal to the field (y if x is
    colinear), e2 = b_hat x e1.
    """
    b, e1, e2 = triad(B_static)
    phasor = np.asarray(phasor, dtype=complex)
    return LocalFrame(b, e1, e2, complex(phasor @ b), complex(phasor @ e1), complex(phasor @ e2))


def corotating_amplitude(frame: LocalFrame, atom: Atom):
    """Complex amplitude of the circular component that co-rotates with the
    Larmor precession, for the phasor convention Re[B exp(+i w t)]."""
    return frame.B_perp1 + 1j * atom.sign * frame.B_perp2


def rwa_params(frame: LocalFrame, B_mag, nu_rf, atom: Atom) -> RwaParams:
    """Detuning, Rabi frequency and Larmor frequency in Hz.

    ``nu_rf`` is the drive frequency in Hz.
    """
    larmor = abs(atom.mu) * B_mag / H_PLANCK
    rabi = abs(atom.mu) / (2 * H_PLANCK) * abs(corotating_amplitude(frame, atom))
    return RwaParams(detuning=larmor - nu_rf, rabi=rabi, larmor=larmor)
