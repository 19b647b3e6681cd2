"""Dressed levels: diagonalization, (m~, kappa) labeling, adiabatic potentials.

Labels come from the RWA limit, where each kappa manifold is diagonalized on
its own and m~ follows the energy ordering of the analytic RWA potentials. The
inter-manifold couplings are then ramped from zero to full strength and every
level is followed by maximum eigenvector overlap.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidArgumentError, LabelingAmbiguityError, TopologyError, TrackingError
from .hamiltonian import DressedHamiltonian, central_kappa, rwa_potential
from .local_frame import decompose, rwa_params
from .spin import hermitian_eig

ACCEPT_CONFIDENCE = 0.7
LABEL_PAD = 6
TRACK_OVERLAP = 0.9
MAX_RAMP_STEPS = 512
MAX_REFINE_DEPTH = 10


@dataclass(eq=False)
class DressedLevel:
    energy: float
    vector: np.ndarray
    m_tilde: float = None
    kappa: float = None
    confidence: float = None

    @property
    def label(self):
        return (self.m_tilde, self.kappa)


def dress(H: DressedHamiltonian):
    """All eigenpairs of ``H``, ascending, unlabeled."""
    eig = hermitian_eig(H.matrix)
    return [DressedLevel(float(e), eig.vectors[:, k]) for k, e in enumerate(eig.values)]


def _rwa_start(H: DressedHamiltonian):
    """Exact eigenpairs of the manifold-diagonal matrix with their labels."""
    basis = H.basis
    dim = basis.dim
    sgn = H.atom.sign
    energies = np.empty(dim)
    vectors = np.zeros((dim, dim), dtype=complex)
    m_tilde = np.empty(dim)
    kappa = np.empty(dim)
    detuning_sign = -1.0 if H.larmor < H.nu_rf else 1.0
    col = 0
    for k in basis.kappas():
        idx = basis.manifold(k)
        n = len(idx)
        block = H.matrix[np.ix_(idx, idx)]
        if not np.any(block - np.diag(np.diag(block))):
            # uncoupled: bare states, with m~ = m sgn(detuning)
            e = np.diag(block).real.copy()
            vecs = np.eye(n, dtype=complex)
            mts = basis.m[idx] * detuning_sign
        else:
            eig = hermitian_eig(block)
            e, vecs = eig.values, eig.vectors
            # energy rises with sgn(mu) m~
            ms = np.sort(basis.m[idx] * detuning_sign)
            mts = ms if sgn > 0 else ms[::-1]
        sl = slice(col, col + n)
        energies[sl] = e
        vectors[idx, sl] = vecs
        m_tilde[sl] = mts
        kappa[sl] = k
        col += n
    return energies, vectors, m_tilde, kappa


def _align_degenerate(values, vectors, prev, tol):
    """Rotate eigenvectors inside (near-)degenerate clusters onto ``prev``."""
    n = len(values)
    start = 0
    vectors = vectors.copy()
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            Vc = vectors[:, start:stop]
            C = Vc.conj().T @ prev
            weight = np.linalg.norm(C, axis=0)
            sel = np.sort(np.argsort(-weight, kind="stable")[: stop - start])
            U, _, Wh = np.linalg.svd(C[:, sel])
            vectors[:, start:stop] = Vc @ (U @ Wh)
        start = stop
    return vectors


def _match(prev, values, vectors):
    """Permutation ``perm`` with new column perm[j] continuing previous slot j."""
    scale = max(1.0, float(np.abs(values).max()))
    vectors = _align_degenerate(values, vectors, prev, 1e-9 * scale)
    O = np.abs(prev.conj().T @ vectors)
    rows, cols = linear_sum_assignment(-(O**2))
    perm = np.empty(len(values), dtype=int)
    perm[rows] = cols
    conf = O[np.arange(len(values)), perm]
    return perm, conf, vectors


@dataclass(eq=False)
class LabeledSpectrum:
    """All eigenpairs of one Hamiltonian with labels; ``interior`` marks
    manifolds unaffected by the photon-number cutoff."""

    H: DressedHamiltonian
    energies: np.ndarray
    vectors: np.ndarray
    m_tilde: np.ndarray
    kappa: np.ndarray
    confidence: np.ndarray
    n_steps: int = 0
    interior: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.interior is None:
            kmax = self.H.basis.interior_kappa_max
            self.interior = np.abs(self.kappa) <= kmax + 1e-9

    def find(self, m_tilde, kappa):
        hit = np.flatnonzero((np.abs(self.m_tilde - m_tilde) < 1e-9) & (np.abs(self.kappa - kappa) < 1e-9))
        if len(hit) != 1:
            raise InvalidArgumentError(f"no unique level labeled (m~={m_tilde}, kappa={kappa})")
        return int(hit[0])

    def energy(self, m_tilde, kappa):
        return float(self.energies[self.find(m_tilde, kappa)])

    def levels(self):
        return [DressedLevel(float(self.energies[k]), self.vectors[:, k], float(self.m_tilde[k]),
                             float(self.kappa[k]), float(self.confidence[k]))
                for k in np.flatnonzero(self.interior)]


def _ramp(H, n_steps):
    energies, vectors, mt, kp = _rwa_start(H)
    conf = np.ones(len(energies))
    for j in range(1, n_steps + 1):
        eig = hermitian_eig(H.ramped(j / n_steps))
        perm, c, aligned = _match(vectors, eig.values, eig.vectors)
        energies = eig.values[perm]
        vectors = aligned[:, perm]
        conf = np.minimum(conf, c)
    return energies, vectors, mt, kp, conf


def rwa_spectrum(H: DressedHamiltonian) -> LabeledSpectrum:
    """Labeled eigenpairs of the manifold-diagonal (RWA) part of ``H``."""
    energies, vectors, mt, kp = _rwa_start(H)
    return LabeledSpectrum(H, energies, vectors, mt, kp, np.ones(len(energies)), 0)


def intra_spacing(spec: LabeledSpectrum, kappa=None):
    """Signed-convention spacing W with E(m~, kappa) = kappa nu + sgn(mu) m~ W."""
    F = spec.H.basis.F
    if F == 0:
        raise InvalidArgumentError("no intra-manifold spacing for F = 0")
    kappa = central_kappa(F) if kappa is None else kappa
    return spec.H.atom.sign * (spec.energy(F, kappa) - spec.energy(F - 1, kappa))


def label_levels(H: DressedHamiltonian, n_steps=8, max_steps=MAX_RAMP_STEPS) -> LabeledSpectrum:
    """Label every eigenpair of ``H`` by continuation from the RWA limit.

    The step count doubles until all interior confidences reach 0.7.
    """
    if n_steps < 2:
        raise InvalidArgumentError("n_steps must be >= 2")
    steps = int(n_steps)
    while True:
        energies, vectors, mt, kp, conf = _ramp(H, steps)
        spec = LabeledSpectrum(H, energies, vectors, mt, kp, conf, steps)
        bad = spec.interior & (conf < ACCEPT_CONFIDENCE)
        if not bad.any():
            return spec
        if steps >= max_steps:
            pairs = [(mt[k], kp[k], conf[k]) for k in np.flatnonzero(bad)]
            raise LabelingAmbiguityError(
                f"{len(pairs)} levels below confidence {ACCEPT_CONFIDENCE} after {steps} steps", pairs)
        steps *= 2


def label_by_continuation(scenario, point, n_steps=None, basis=None, pad=0):
    """Labeled interior levels at ``point`` (list of DressedLevel)."""
    return labeled_spectrum(scenario, point, n_steps, basis, pad).levels()


def labeled_spectrum(scenario, point, n_steps=None, basis=None, pad=0) -> LabeledSpectrum:
    """Labeled spectrum at ``point``.

    With ``pad > 0`` the photon basis is widened by ``pad`` on each side while
    the reported (interior) manifolds stay those of the scenario's cutoff, so
    truncation artifacts near the basis edge cannot leak into their labels.
    """
    if pad:
        if basis is not None:
            raise InvalidArgumentError("pass either basis or pad")
        basis = scenario.basis(scenario.dN_max + int(pad))
    H = scenario.hamiltonian(point, basis)
    spec = label_levels(H, scenario.n_steps if n_steps is None else n_steps)
    if pad:
        kmax = scenario.dN_max - H.basis.F
        spec.interior = np.abs(spec.kappa) <= kmax + 1e-9
    return spec


@dataclass(eq=False)
class AdiabaticPotential:
    coords: np.ndarray  # m, along the scan line
    positions: np.ndarray  # m, shape (n, 3)
    values: np.ndarray  # Hz
    m_tilde: float
    kappa: float
    model: str = "full"
    reference_offset: float = 0.0

    @property
    def relative(self):
        return self.values - self.reference_offset


class LevelTracker:
    """Follow labeled levels along a sequence of positions.

    Continuity (overlap >= 0.9 between neighbouring points) is enforced on the
    ``watch`` labels, by default every interior level; the grid interval is
    bisected until it holds.
    """

    def __init__(self, scenario, basis=None, watch=None):
        self.scenario = scenario
        self.basis = basis or scenario.basis()
        self.watch = watch
        self.spec = None
        self.position = None
        self._mask = None

    def start(self, point):
        self.spec = labeled_spectrum(self.scenario, point, basis=self.basis)
        self.position = np.asarray(point, float)
        if self.watch is None:
            self._mask = self.spec.interior.copy()
        else:
            self._mask = np.zeros(len(self.spec.energies), bool)
            for m, k in self.watch:
                self._mask[self.spec.find(m, k)] = True
        return self.spec

    def _diag(self, point):
        H = self.scenario.hamiltonian(point, self.basis)
        return H, hermitian_eig(H.matrix)

    def _advance(self, vec_from, p_from, p_to, depth):
        H, eig = self._diag(p_to)
        perm, conf, aligned = _match(vec_from, eig.values, eig.vectors)
        worst = conf[self._mask].min()
        if worst >= TRACK_OVERLAP:
            return H, eig.values[perm], aligned[:, perm], conf
        if depth >= MAX_REFINE_DEPTH:
            raise TrackingError(f"overlap {worst:.3f} < {TRACK_OVERLAP} after refinement", position=p_to)
        mid = 0.5 * (p_from + p_to)
        _, _, v_mid, _ = self._advance(vec_from, p_from, mid, depth + 1)
        return self._advance(v_mid, mid, p_to, depth + 1)

    def step(self, point):
        point = np.asarray(point, float)
        H, energies, vectors, conf = self._advance(self.spec.vectors, self.position, point, 0)
        s = self.spec
        self.spec = LabeledSpectrum(H, energies, vectors, s.m_tilde, s.kappa, conf, s.n_steps, s.interior)
        self.position = point
        return self.spec


def track(scenario, positions, basis=None, watch=None):
    """Labeled spectra at every position, propagated by overlap."""
    tracker = LevelTracker(scenario, basis, watch)
    out = [tracker.start(positions[0])]
    for p in positions[1:]:
        out.append(tracker.step(p))
    return out


def rwa_energy(scenario, point, m_tilde, kappa):
    """kappa nu_rf + m~ sgn(mu) sqrt(detuning^2 + rabi^2) at ``point`` (Hz)."""
    s = scenario.sample(point)
    frame = decompose(s.B_static, s.B_rf)
    p = rwa_params(frame, float(np.linalg.norm(s.B_static)), scenario.nu_rf, scenario.atom)
    return kappa * scenario.nu_rf + rwa_potential(p.detuning, p.rabi, m_tilde, scenario.atom.sign)


def potential_curve(scenario, coords=None, m_tilde=None, kappa=None, model="full", positions=None):
    """Adiabatic potential of branch (m~, kappa) along the scenario's scan line.

    ``model`` is "full" (beyond RWA, tracked by overlap) or "rwa" (analytic).
    """
    F = scenario.atom.F
    m_tilde = F if m_tilde is None else m_tilde
    kappa = central_kappa(F) if kappa is None else kappa
    if positions is None:
        c, positions = scenario.line() if coords is None else _line_at(scenario, coords)
        coords = c
    positions = np.asarray(positions, float)
    if coords is None:
        coords = np.linalg.norm(positions - positions[0], axis=1)
    if model == "rwa":
        values = np.array([rwa_energy(scenario, p, m_tilde, kappa) for p in positions])
    elif model == "full":
        spectra = track(scenario, positions, watch=[(m_tilde, kappa)])
        values = np.array([s.energy(m_tilde, kappa) for s in spectra])
    else:
        raise InvalidArgumentError(f"unknown model {model!r}")
    return AdiabaticPotential(np.asarray(coords, float), positions, values, m_tilde, kappa, model)


def _line_at(scenario, coords):
    coords = np.asarray(coords, float)
    d = np.asarray(scenario.line_direction, float)
    d = d / np.linalg.norm(d)
    return coords, np.asarray(scenario.line_origin, float)[None, :] + coords[:, None] * d[None, :]


@dataclass(frozen=True)
class DoubleWellMetrics:
    minima_positions: tuple  # line coordinates (m)
    splitting: float  # m
    barrier: float  # Hz
    asymmetry: float  # Hz
    minima_values: tuple = ()


def _parabola(x, y, i):
    """Vertex of the parabola through points i-1, i, i+1."""
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    d1 = (y1 - y0) / (x1 - x0)
    d2 = (y2 - y1) / (x2 - x1)
    a = (d2 - d1) / (x2 - x0)
    if a == 0:
        return x1, y1
    b = d1 - a * (x0 + x1)
    xv = -b / (2 * a)
    xv = min(max(xv, x0), x2)
    return xv, y1 + (xv - x1) * (b + a * (xv + x1))


def local_minima(values):
    v = np.asarray(values)
    return [i for i in range(1, len(v) - 1) if v[i] < v[i - 1] and v[i] <= v[i + 1]]


def double_well_metrics(pot: AdiabaticPotential) -> DoubleWellMetrics:
    x, v = pot.coords, pot.values
    mins = local_minima(v)
    if len(mins) != 2:
        raise TopologyError(f"expected two local minima, found {len(mins)}", count=len(mins))
    (xa, ya), (xb, yb) = (_parabola(x, v, i) for i in mins)
    i, j = mins
    k = i + int(np.argmax(v[i:j + 1]))
    if i < k < j:
        xm, ym = _parabola(x, -v, k)
        ym = -ym
    else:
        ym = v[k]
    low = min(ya, yb)
    return DoubleWellMetrics((xa, xb), abs(xb - xa), max(ym - low, 0.0), ya - yb, (ya, yb))


def trap_minimum(pot: AdiabaticPotential, rel_tie=1e-9):
    """Line coordinate and value of the global minimum, parabola-refined.

    Minima equal within ``rel_tie`` resolve to the larger coordinate.
    """
    x, v = pot.coords, pot.values
    candidates = local_minima(v)
    if not candidates:
        i = int(np.argmin(v))
        return x[i], v[i]
    refined = [_parabola(x, v, i) for i in candidates]
    best = min(y for _, y in refined)
    tol = rel_tie * max(1.0, abs(best))
    return max((xv, yv) for xv, yv in refined if yv <= best + tol)
