"""Spectroscopy of dressed levels with a weak tickling field.

Rates come from first-order perturbation theory: the tickling operator acts
on the spin only and is the identity on the photon-number offset.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import Atom
from .errors import DressError, InvalidArgumentError
from .hamiltonian import build_basis, build_full, central_kappa
from .local_frame import LocalFrame
from .solver import (LABEL_PAD, LabeledSpectrum, intra_spacing, label_levels, labeled_spectrum, local_minima,
                     potential_curve, rwa_energy, rwa_spectrum, trap_minimum)
from .spin import spin_matrices

DEFAULT_WEIGHT_FLOOR = 1e-4


@dataclass(frozen=True)
class TransitionLine:
    frequency: float  # Hz
    weight: float
    from_label: tuple
    to_label: tuple
    order: int
    branch: str  # "+", "-" or "intra"

    @property
    def tag(self):
        """Order plus branch, e.g. "2-" for 2 nu_rf - Omega."""
        return f"{self.order}{self.branch}" if self.branch != "intra" else f"{self.order}i"


def _classify(dE, dkappa, dm, nu_rf):
    if dm == 0:
        return abs(int(round(dkappa))), "intra"
    inner = dE - dkappa * nu_rf
    if dkappa == 0 or math.copysign(1, dkappa) == math.copysign(1, inner):
        return abs(int(round(dkappa))), "+"
    return abs(int(round(dkappa))), "-"


def transition_elements(spec: LabeledSpectrum, B_spec_local, atom: Atom, trapped=None,
                        weight_floor=DEFAULT_WEIGHT_FLOOR, include_intra=False):
    """Lines from the trapped level to every other interior level.

    ``B_spec_local`` holds the tickling phasor along (e1, e2, b_hat). Upward
    transitions are driven by its negative-frequency part, so the conjugate
    phasor enters there. Weights are |<f|(mu/h) B.F|i>|^2 in Hz^2.
    """
    if not isinstance(spec, LabeledSpectrum) or spec.m_tilde is None:
        raise InvalidArgumentError("transition_elements needs labeled levels")
    if not 0 <= weight_floor < 1:
        raise InvalidArgumentError("weight_floor must lie in [0, 1)")
    F = spec.H.basis.F
    trapped = (F, central_kappa(F)) if trapped is None else tuple(trapped)
    i = spec.find(*trapped)
    s = spin_matrices(atom.F)
    B = np.asarray(B_spec_local, dtype=complex)
    nu = spec.H.nu_rf
    vi = spec.vectors[:, i].reshape(-1, s.dim)
    # spin operator applied to every photon block of |i>
    ops = {}
    for conj in (False, True):
        b = B.conj() if conj else B
        ops[conj] = (vi @ (atom.mu_over_h * s.dot(b)).T).reshape(-1)
    Ei = spec.energies[i]
    cand = []
    for f in np.flatnonzero(spec.interior):
        if f == i:
            continue
        dE = spec.energies[f] - Ei
        M = np.vdot(spec.vectors[:, f], ops[bool(dE > 0)])
        dm = spec.m_tilde[f] - trapped[0]
        dk = spec.kappa[f] - trapped[1]
        n, branch = _classify(dE, dk, dm, nu)
        if branch == "intra" and not include_intra:
            continue
        cand.append(TransitionLine(float(abs(dE)), float(abs(M) ** 2), trapped,
                                   (float(spec.m_tilde[f]), float(spec.kappa[f])), n, branch))
    if not cand:
        return []
    wmax = max(c.weight for c in cand)
    keep = [c for c in cand if c.weight >= weight_floor * wmax and c.weight > 0]
    return sorted(keep, key=lambda c: (c.frequency, c.to_label))


def resonance_chain(rabi, nu_rf, n_max):
    """Sorted distinct values of n nu_rf +- rabi for n = 0..n_max, negatives dropped."""
    if n_max < 0:
        raise InvalidArgumentError("n_max must be >= 0")
    n = np.arange(int(n_max) + 1) * float(nu_rf)
    vals = np.concatenate([n - rabi, n + rabi])
    return np.unique(vals[vals >= 0]).tolist()


def strongest_order(lines):
    if not lines:
        raise InvalidArgumentError("no lines")
    return min(lines, key=lambda l: (-l.weight, l.order)).order


@dataclass
class BlochSiegert:
    shifts: dict  # (from_label, to_label) -> Hz
    unmatched: list = field(default_factory=list)

    @property
    def max_abs(self):
        return max((abs(v) for v in self.shifts.values()), default=0.0)


def bloch_siegert_shift(full_lines, rwa_lines):
    """nu_full - nu_rwa for every line present in both sets (matched by labels)."""
    full = {(l.from_label, l.to_label): l for l in full_lines}
    rwa = {(l.from_label, l.to_label): l for l in rwa_lines}
    shifts = {k: full[k].frequency - rwa[k].frequency for k in rwa if k in full}
    unmatched = sorted(set(full) ^ set(rwa))
    return BlochSiegert(shifts, unmatched)


def two_level_splitting(larmor, rabi, nu_rf, atom=None, dN_max=12, n_steps=8):
    """Dressed level spacing W of a spin driven by a linear field
    perpendicular to the static field."""
    atom = atom or Atom(0.5, 2.0, 1.0)
    mu_h = abs(atom.mu_over_h)
    B1 = 2 * rabi / mu_h
    frame = LocalFrame(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
                       0j, complex(B1), 0j)
    basis = build_basis(atom.F, dN_max, atom.sign)
    H = build_full(frame, larmor / mu_h, nu_rf, atom, basis)
    return intra_spacing(label_levels(H, n_steps))


def resonance_shift(rabi, nu_rf, atom=None, dN_max=12):
    """nu_rf minus the Larmor frequency that minimizes the dressed spacing.

    For a two-level system this approaches rabi^2 / (4 nu_rf) at weak drive.
    """
    if not rabi > 0:
        return 0.0
    res = minimize_scalar(lambda nl: two_level_splitting(nl, rabi, nu_rf, atom, dN_max),
                          bounds=(nu_rf - 2 * rabi, nu_rf + 2 * rabi), method="bounded",
                          options={"xatol": 1e-10 * nu_rf, "maxiter": 500})
    return float(nu_rf - res.x)


@dataclass
class TrapPoint:
    model: str
    coordinate: float  # m along the scan line
    position: np.ndarray
    spectrum: LabeledSpectrum
    lines: list


def _rwa_minimum(scenario, trapped):
    """Global minimum of the analytic RWA branch: grid scan, then bounded
    Brent refinement so the result varies smoothly with the parameters."""
    coords, positions = scenario.line()
    d = np.asarray(scenario.line_direction, float)
    d = d / np.linalg.norm(d)
    origin = np.asarray(scenario.line_origin, float)

    def f(x):
        return rwa_energy(scenario, origin + x * d, *trapped)

    values = np.array([f(x) for x in coords])
    cands = local_minima(values)
    if not cands:
        i = int(np.argmin(values))
        return coords[i]
    found = []
    for i in cands:
        r = minimize_scalar(f, bounds=(coords[i - 1], coords[i + 1]), method="bounded",
                            options={"xatol": 1e-13})
        found.append((float(r.fun), float(r.x)))
    best = min(v for v, _ in found)
    tol = 1e-9 * max(1.0, abs(best))
    return max(x for v, x in found if v <= best + tol)


def trap_point(scenario, model="full", weight_floor=DEFAULT_WEIGHT_FLOOR, trapped=None):
    """Minimum of the trapped branch for ``model`` and the lines emitted there."""
    F = scenario.atom.F
    trapped = (F, central_kappa(F)) if trapped is None else tuple(trapped)
    if model == "rwa":
        x = _rwa_minimum(scenario, trapped)
    elif model == "full":
        pot = potential_curve(scenario, m_tilde=trapped[0], kappa=trapped[1], model="full")
        x, _ = trap_minimum(pot)
    else:
        raise InvalidArgumentError(f"unknown model {model!r}")
    d = np.asarray(scenario.line_direction, float)
    pos = np.asarray(scenario.line_origin, float) + x * d / np.linalg.norm(d)
    if model == "full":
        spec = labeled_spectrum(scenario, pos, pad=LABEL_PAD)
    else:
        spec = rwa_spectrum(scenario.hamiltonian(pos))
    lines = transition_elements(spec, spec.H.B_spec_local, scenario.atom, trapped, weight_floor)
    return TrapPoint(model, float(x), pos, spec, lines)


@dataclass
class ScanEntry:
    current: float  # A
    lines: list = field(default_factory=list)
    rwa_lines: list = field(default_factory=list)
    shifts: BlochSiegert = None
    position: np.ndarray = None
    rwa_position: np.ndarray = None
    status: str = "ok"

    def branches(self, window=None):
        lo, hi = window if window is not None else (-math.inf, math.inf)
        return sorted({l.tag for l in self.lines if lo <= l.frequency <= hi})


@dataclass
class ResonanceMap:
    currents: np.ndarray
    entries: list
    weight_floor: float
    window: tuple

    def entry(self, current):
        k = int(np.argmin(np.abs(self.currents - current)))
        return self.entries[k]


def _scan_one(args):
    scenario, current, window, weight_floor = args
    sc = scenario.with_currents(current, current)
    entry = ScanEntry(float(current))
    try:
        full = trap_point(sc, "full", weight_floor)
        rwa = trap_point(sc, "rwa", weight_floor)
    except DressError as exc:
        entry.status = type(exc).__name__
        return entry
    lo, hi = window
    entry.lines = [l for l in full.lines if lo <= l.frequency <= hi]
    entry.rwa_lines = [l for l in rwa.lines if lo <= l.frequency <= hi]
    entry.shifts = bloch_siegert_shift(full.lines, rwa.lines)
    entry.position = full.position
    entry.rwa_position = rwa.position
    return entry


def scan_resonances(scenario, currents, window=(0.0, 2.2e6), weight_floor=DEFAULT_WEIGHT_FLOOR, jobs=1):
    """Transition lines of full and RWA models versus RF current (I_A = I_B).

    Each model is evaluated at its own potential minimum. Failures at one
    current are recorded in that entry's status.
    """
    currents = np.asarray(currents, float)
    if currents.ndim != 1 or np.any(np.diff(currents) <= 0):
        raise InvalidArgumentError("currents must be strictly increasing")
    if not 0 <= window[0] < window[1]:
        raise InvalidArgumentError("invalid frequency window")
    tasks = [(scenario, I, tuple(window), weight_floor) for I in currents]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_scan_one, tasks))
    else:
        entries = [_scan_one(t) for t in tasks]
    return ResonanceMap(currents, entries, weight_floor, tuple(window))
