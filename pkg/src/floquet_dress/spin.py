"""Angular-momentum matrices and the Hermitian eigensolver used throughout."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, NumericFailureError

MAX_SPIN = 10
MAX_EIG_DIM = 1024


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpinSet:
    """Spin-F operators in units of hbar, basis ordered m = F, F-1, ..., -F."""

    F: float
    dim: int
    m: np.ndarray
    Fx: np.ndarray
    Fy: np.ndarray
    Fz: np.ndarray

    @property
    def Fp(self):
        return self.Fx + 1j * self.Fy

    @property
    def Fm(self):
        return self.Fx - 1j * self.Fy

    def dot(self, v):
        """v . F for a (possibly complex) 3-vector in the frame of (Fx, Fy, Fz)."""
        return v[0] * self.Fx + v[1] * self.Fy + v[2] * self.Fz


def _check_spin(F):
    try:
        twoF = 2 * float(F)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"spin must be a number, got {F!r}") from None
    if not np.isfinite(twoF) or abs(twoF - round(twoF)) > 1e-12:
        raise InvalidArgumentError(f"spin must be a half-integer, got {F!r}")
    if twoF < 0 or twoF > 2 * MAX_SPIN:
        raise InvalidArgumentError(f"spin must lie in [0, {MAX_SPIN}], got {F!r}")
    return round(twoF) / 2


@lru_cache(maxsize=None)
def _spin_cached(F):
    dim = int(round(2 * F)) + 1
    m = F - np.arange(dim, dtype=float)
    # <m+1|F+|m> sits one row above the diagonal in descending-m order
    ladder = np.sqrt(F * (F + 1) - m[1:] * (m[1:] + 1))
    Fp = np.diag(ladder, 1).astype(complex)
    Fm = Fp.conj().T
    Fx = 0.5 * (Fp + Fm)
    Fy = -0.5j * (Fp - Fm)
    Fz = np.diag(m).astype(complex)
    return SpinSet(F, dim, _frozen(m), _frozen(Fx), _frozen(Fy), _frozen(Fz))


def spin_matrices(F) -> SpinSet:
    """Return Fx, Fy, Fz for spin ``F`` (0 <= F <= 10, half-integer)."""
    return _spin_cached(_check_spin(F))


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray


def fix_phases(vectors):
    """Make the largest-magnitude entry of each column real and positive.

    Ties go to the lowest index (argmax semantics).
    """
    v = np.array(vectors, dtype=complex, copy=True)
    idx = np.argmax(np.abs(v), axis=0)
    cols = np.arange(v.shape[1])
    pivot = v[idx, cols]
    v *= (pivot.conj() / np.abs(pivot))[None, :]
    v[idx, cols] = np.abs(pivot)
    return v


def hermitian_eig(H, check=True) -> EigenDecomposition:
    """Eigen-decomposition of a dense complex Hermitian matrix.

    Eigenvalues ascending, eigenvectors orthonormal with the phase convention of
    :func:`fix_phases`. Backed by LAPACK ``zheevd``; the residual contract is
    checked explicitly when ``check`` is set.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {H.shape}")
    n = H.shape[0]
    if n > MAX_EIG_DIM:
        raise InvalidArgumentError(f"dimension {n} exceeds {MAX_EIG_DIM}")
    norm = np.linalg.norm(H)
    if not np.isfinite(norm):
        raise InvalidArgumentError("matrix has non-finite entries")
    if np.linalg.norm(H - H.conj().T) > 1e-10 * max(norm, np.finfo(float).tiny):
        raise InvalidArgumentError("matrix is not Hermitian within 1e-10 relative")
    try:
        w, v = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"eigensolver did not converge: {exc}") from exc
    v = fix_phases(v)
    if check and n:
        res = np.linalg.norm(H @ v - v * w[None, :], axis=0).max()
        if res > 1e-12 * norm:
            raise NumericFailureError("eigen-residual exceeds tolerance", residual=res)
    return EigenDecomposition(_frozen(w), _frozen(v))
