"""Bare photon-number basis and the dressed-atom Hamiltonian.

All energies are frequencies (energy / h, in Hz). The mean photon number never
appears: in the classical-field limit the photon coupling gamma*sqrt(<N>)
reduces to mu/2, and only the offset dN = N - <N> is kept.
"""

from dataclasses import dataclass, replace

import numpy as np

from .constants import H_PLANCK, Atom
from .errors import InvalidArgumentError
from .local_frame import LocalFrame, decompose
from .spin import spin_matrices


@dataclass(frozen=True, eq=False)
class BareBasis:
    """States |m_F, dN> ordered with dN outer (ascending) and m_F inner (descending)."""

    F: float
    dN_max: int
    sign: int
    m: np.ndarray
    dN: np.ndarray
    kappa: np.ndarray

    @property
    def spin_dim(self):
        return int(round(2 * self.F)) + 1

    @property
    def dim(self):
        return self.spin_dim * (2 * self.dN_max + 1)

    @property
    def interior_kappa_max(self):
        return self.dN_max - self.F

    def index(self, m_F, dN):
        im = int(round(self.F - m_F))
        if not (0 <= im < self.spin_dim) or abs(dN) > self.dN_max:
            raise InvalidArgumentError(f"state |{m_F}, {dN}> outside the basis")
        return (int(dN) + self.dN_max) * self.spin_dim + im

    def label(self, index):
        return float(self.m[index]), int(self.dN[index])

    def manifold(self, kappa):
        """Indices of the kappa manifold, ordered by descending m_F."""
        return np.flatnonzero(np.abs(self.kappa - kappa) < 1e-9)

    def kappas(self):
        return np.unique(self.kappa)

    def is_interior(self, kappa):
        return abs(kappa) <= self.interior_kappa_max + 1e-9


def central_kappa(F):
    """Smallest non-negative kappa: 0 for integer spin, 1/2 otherwise."""
    return float(round(2 * F) % 2) / 2


def build_basis(F, dN_max=12, sign=1) -> BareBasis:
    """Bare basis with kappa = dN + sgn(g_F) m_F. ``dN_max=12`` gives 25 manifolds."""
    if int(dN_max) != dN_max or dN_max < 1:
        raise InvalidArgumentError("dN_max must be an integer >= 1")
    s = spin_matrices(F)
    sign = 1 if sign >= 0 else -1
    n = 2 * int(dN_max) + 1
    m = np.tile(s.m, n)
    dN = np.repeat(np.arange(-dN_max, dN_max + 1), s.dim)
    kappa = dN + sign * m
    for a in (m, dN, kappa):
        a.setflags(write=False)
    return BareBasis(s.F, int(dN_max), sign, m, dN, kappa)


@dataclass(frozen=True, eq=False)
class DressedHamiltonian:
    basis: BareBasis
    matrix: np.ndarray
    nu_rf: float
    atom: Atom
    larmor: float
    local: LocalFrame
    point: np.ndarray = None
    B_spec_local: np.ndarray = None

    def same_manifold_mask(self):
        k = self.basis.kappa
        return np.abs(k[:, None] - k[None, :]) < 1e-9

    def rwa_matrix(self):
        """Full matrix with every inter-manifold element removed."""
        return np.where(self.same_manifold_mask(), self.matrix, 0.0)

    def ramped(self, s):
        """RWA part plus ``s`` times the inter-manifold (counter-rotating and
        parallel) couplings."""
        if s == 1:
            return self.matrix
        mask = self.same_manifold_mask()
        return np.where(mask, self.matrix, s * self.matrix)


def build_full(frame: LocalFrame, B_mag, nu_rf, atom: Atom, basis: BareBasis, point=None, B_spec_local=None):
    """Dressed Hamiltonian (Hz) for a static field of magnitude ``B_mag`` along
    ``frame.b_hat`` and RF phasor components held by ``frame``.

    Diagonal: (mu/h)|B| m_F + nu_rf dN. The block <dN+1|H|dN> is
    (mu/2h)(B_perp1 Fx + B_perp2 Fy + B_par Fz); its adjoint sits below.
    """
    if basis.F != spin_matrices(atom.F).F or basis.sign != atom.sign:
        raise InvalidArgumentError("basis does not match the atom")
    s = spin_matrices(atom.F)
    d = s.dim
    n = 2 * basis.dN_max + 1
    mu_h = atom.mu / H_PLANCK
    larmor_signed = mu_h * B_mag
    V = 0.5 * mu_h * s.dot(frame.components)
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    diag = larmor_signed * basis.m + nu_rf * basis.dN
    H[np.diag_indices(basis.dim)] = diag
    Vh = V.conj().T
    for i in range(n - 1):
        lo, hi = i * d, (i + 1) * d
        H[hi:hi + d, lo:hi] = V
        H[lo:hi, hi:hi + d] = Vh
    H.setflags(write=False)
    return DressedHamiltonian(basis, H, float(nu_rf), atom, abs(larmor_signed), frame,
                              None if point is None else np.asarray(point, float), B_spec_local)


def build_from_sample(sample, nu_rf, atom: Atom, basis: BareBasis):
    frame = decompose(sample.B_static, sample.B_rf)
    return build_full(frame, float(np.linalg.norm(sample.B_static)), nu_rf, atom, basis,
                      point=sample.position, B_spec_local=frame.project(sample.B_spec))


def build_rwa_restriction(full: DressedHamiltonian, kappa0):
    """The (2F+1)x(2F+1) block of one kappa manifold (rows ordered by descending m_F)."""
    basis = full.basis
    if not basis.is_interior(kappa0):
        raise InvalidArgumentError(f"kappa {kappa0} outside the interior range +-{basis.interior_kappa_max}")
    idx = basis.manifold(kappa0)
    if len(idx) != basis.spin_dim:
        raise InvalidArgumentError(f"kappa {kappa0} is not a manifold of this basis")
    return full.matrix[np.ix_(idx, idx)].copy()


def rwa_potential(detuning, rabi, m_tilde, sign_mu=1):
    """m~ sgn(mu) sqrt(detuning^2 + rabi^2), any consistent frequency unit."""
    return m_tilde * (1 if sign_mu >= 0 else -1) * np.hypot(detuning, rabi)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to build a dressed Hamiltonian at a point.

    ``line_origin``/``line_direction`` define the default potential scan line.
    """

    atom: Atom
    fields: object  # FieldConfig
    nu_rf: float
    dN_max: int = 12
    n_steps: int = 8
    line_origin: tuple = (0.0, 0.0, 0.0)
    line_direction: tuple = (1.0, 0.0, 0.0)
    line_half_width: float = 6e-6
    line_points: int = 121

    def basis(self, dN_max=None):
        return build_basis(self.atom.F, self.dN_max if dN_max is None else dN_max, self.atom.sign)

    def sample(self, point):
        return self.fields.sample(point)

    def hamiltonian(self, point, basis=None):
        basis = basis or self.basis()
        return build_from_sample(self.sample(point), self.nu_rf, self.atom, basis)

    def with_currents(self, I_A, I_B):
        return replace(self, fields=self.fields.with_rf_currents(I_A, I_B))

    def with_dn_max(self, dN_max):
        return replace(self, dN_max=int(dN_max))

    def line(self, num=None, half_width=None):
        """(coords, positions) of the scan line grid."""
        num = self.line_points if num is None else num
        half = self.line_half_width if half_width is None else half_width
        coords = np.linspace(-half, half, num)
        d = np.asarray(self.line_direction, float)
        d = d / np.linalg.norm(d)
        return coords, np.asarray(self.line_origin, float)[None, :] + coords[:, None] * d[None, :]
