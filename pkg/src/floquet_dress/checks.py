"""Verification suites shared by the ``selftest`` command and the test-suite.

Each suite returns a CheckResult; randomized suites draw from a numpy
Generator so that a seed reproduces the exact case list.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import config as cfgmod
from .constants import KHZ, MA, Atom
from .errors import DressError
from .fitting import fit_model, synthesize_dataset
from .floquet import converged_mask, oracle_mismatch, quasi_energies
from .hamiltonian import build_basis, build_full, build_rwa_restriction, central_kappa
from .local_frame import corotating_amplitude, decompose, rwa_params
from .solver import LABEL_PAD, double_well_metrics, labeled_spectrum, potential_curve, rwa_energy
from .spectroscopy import resonance_shift, scan_resonances, strongest_order, transition_elements
from .spin import hermitian_eig


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    cases: int = 1
    value: float = float("nan")
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        if self.cases == 0:
            status = "PASS (no cases)"
        return f"{status:5s} {self.name}: {self.detail} [{self.seconds:.1f} s]"


def _timed(fn):
    def wrapper(*a, **kw):
        t = time.perf_counter()
        r = fn(*a, **kw)
        r.seconds = time.perf_counter() - t
        return r
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_drive(rng, F=None, nu=None, rabi_range=(0.0, 1.0), det_range=(-0.9, 1.0), min_corot=0.3):
    """(atom, B_static, phasor, nu, rabi/nu, detuning/nu) with an arbitrary
    polarization whose co-rotating part holds at least ``min_corot`` of the norm."""
    F = float(rng.choice([0.5, 1.0, 2.0])) if F is None else F
    g = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0))
    atom = Atom(F, g, 1.0)
    nu = float(rng.uniform(2e5, 1e6)) if nu is None else nu
    r = float(rng.uniform(*rabi_range))
    d = float(rng.uniform(*det_range))
    mu_h = abs(atom.mu_over_h)
    B_static = _unit(rng) * (nu * (1 + d)) / mu_h
    while True:
        ph = rng.normal(size=3) + 1j * rng.normal(size=3)
        co = abs(corotating_amplitude(decompose(B_static, ph), atom))
        if co >= min_corot * np.linalg.norm(ph):
            break
    ph = ph * (2 * r * nu / mu_h) / co
    return atom, B_static, ph, nu, r, d


def oracle_case(atom, B_static, phasor, nu, dn_start=12, dn_step=8, dn_cap=60, tol=1e-6):
    """Relative mismatch between dressed eigenvalues and oracle quasi-energies,
    raising dN_max until the comparison converges."""
    q = quasi_energies(atom, B_static, phasor, nu).quasi_energies
    frame = decompose(B_static, phasor)
    B = float(np.linalg.norm(B_static))
    dn = dn_start
    while True:
        basis = build_basis(atom.F, dn, atom.sign)
        eig = hermitian_eig(build_full(frame, B, nu, atom, basis).matrix)
        mask = converged_mask(eig.vectors, basis)
        mis = oracle_mismatch(eig.values[mask], q, nu) if mask.any() else math.inf
        if mis <= tol or dn >= dn_cap:
            return mis, dn
        dn += dn_step


def _oracle_task(args):
    seed, k = args
    rng = np.random.default_rng([seed, k])
    atom, Bs, ph, nu, r, d = random_drive(rng)
    mis, dn = oracle_case(atom, Bs, ph, nu)
    return mis, dn, atom.F, r, d


@_timed
def check_oracle_equivalence(cases=200, seed=0, jobs=1, tol=1e-6):
    """Dressed eigenvalues versus monodromy quasi-energies (random drives)."""
    tasks = [(seed, k) for k in range(cases)]
    if jobs > 1 and cases > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            res = list(pool.map(_oracle_task, tasks))
    else:
        res = [_oracle_task(t) for t in tasks]
    worst = max((r[0] for r in res), default=0.0)
    bad = [k for k, r in enumerate(res) if not r[0] <= tol]
    return CheckResult("oracle_equivalence", not bad,
                       f"{cases} cases, worst mismatch {worst:.2e} nu_rf (tol {tol:g}), {len(bad)} failing",
                       cases, worst, data={"results": res})


@_timed
def check_rwa_equivalence(cases=200, seed=0, tol=1e-10):
    """Single-manifold eigenvalues versus kappa nu + m~ sgn(mu) sqrt(D^2 + W^2)."""
    rng = np.random.default_rng([seed, 1])
    worst = 0.0
    for _ in range(cases):
        F = float(rng.choice([0.5, 1.0, 1.5, 2.0, 2.5, 3.0]))
        atom, Bs, ph, nu, r, d = random_drive(rng, F=F, rabi_range=(0.0, 2.0), det_range=(-0.9, 2.0), min_corot=0.0)
        dn = int(rng.integers(4, 14))
        basis = build_basis(F, dn, atom.sign)
        frame = decompose(Bs, ph)
        B = float(np.linalg.norm(Bs))
        H = build_full(frame, B, nu, atom, basis)
        kmax = basis.interior_kappa_max
        k0 = central_kappa(F) + int(rng.integers(-int(kmax), int(kmax) + 1))
        if not basis.is_interior(k0):
            k0 = central_kappa(F)
        vals = hermitian_eig(build_rwa_restriction(H, k0)).values
        p = rwa_params(frame, B, nu, atom)
        m = np.arange(-F, F + 0.5)
        pred = np.sort(k0 * nu + m * atom.sign * math.hypot(p.detuning, p.rabi))
        err = np.abs(vals - pred).max() / max(np.abs(pred).max(), nu)
        worst = max(worst, err)
    return CheckResult("rwa_equivalence", worst <= tol,
                       f"{cases} cases, worst relative error {worst:.2e} (tol {tol:g})", cases, worst)


def _center_rabi_per_amp(scenario):
    s = scenario.with_currents(1.0, 1.0).sample(scenario.line_origin)
    frame = decompose(s.B_static, s.B_rf)
    return rwa_params(frame, np.linalg.norm(s.B_static), scenario.nu_rf, scenario.atom).rabi


@_timed
def check_rwa_scaling(cfg=None, ratios=(1e-3, 2.5e-3, 6e-3, 1.5e-2, 5e-2), points=11):
    """log-log slope of max |V_full - V_rwa| against the Rabi frequency."""
    cfg = cfg or cfgmod.load("paper_fig1b")
    sc = cfgmod.scenario_from(cfg)
    per_amp = _center_rabi_per_amp(sc)
    coords, positions = sc.line(num=points)
    F = sc.atom.F
    devs = []
    for r in ratios:
        I = r * sc.nu_rf / per_amp
        s = sc.with_currents(I, I)
        full = potential_curve(s, positions=positions, m_tilde=F, model="full").values
        rwa = np.array([rwa_energy(s, p, F, central_kappa(F)) for p in positions])
        devs.append(np.abs(full - rwa).max())
    slope = float(np.polyfit(np.log(ratios), np.log(devs), 1)[0])
    return CheckResult("rwa_scaling", abs(slope - 2.0) <= 0.1,
                       f"slope {slope:.4f} (target 2.0 +- 0.1) over Omega/nu in [{min(ratios):g}, {max(ratios):g}]",
                       len(ratios), slope, data={"deviations": devs})


@_timed
def check_bloch_siegert_two_level(ratios=(0.01, 0.02, 0.05, 0.1), nu=600e3, tol=0.05):
    """Resonance shift of a driven spin-1/2 versus Omega^2 / (4 nu)."""
    rel = []
    for r in ratios:
        shift = resonance_shift(r * nu, nu)
        rel.append(shift / ((r * nu) ** 2 / (4 * nu)) - 1)
    worst = max(abs(x) for x in rel)
    return CheckResult("bloch_siegert_two_level", worst <= tol,
                       f"worst relative deviation {worst:.2e} (tol {tol:g})", len(ratios), worst,
                       data={"relative": rel})


@_timed
def check_scenario_potentials(cfg=None, min_ratio=1.8):
    """Barrier heights of full and RWA potentials at the preset current."""
    cfg = cfg or cfgmod.load("paper_fig1b")
    sc = cfgmod.scenario_from(cfg)
    F = sc.atom.F
    full = double_well_metrics(potential_curve(sc, m_tilde=F, model="full"))
    rwa = double_well_metrics(potential_curve(sc, m_tilde=F, model="rwa"))
    ratio = max(full.barrier, rwa.barrier) / min(full.barrier, rwa.barrier)
    return CheckResult("scenario_potentials", ratio >= min_ratio,
                       f"barrier full {full.barrier / KHZ:.2f} kHz, rwa {rwa.barrier / KHZ:.2f} kHz, "
                       f"ratio {ratio:.3f} (need >= {min_ratio})", 1, ratio,
                       data={"full": full, "rwa": rwa})


def scenario_scan(cfg=None, currents=None, jobs=1):
    cfg = cfg or cfgmod.load("paper_fig4")
    sc = cfgmod.scenario_from(cfg)
    cur = cfgmod.scan_currents(cfg) if currents is None else np.asarray(currents, float)
    return scan_resonances(sc, cur, cfgmod.scan_window(cfg), cfg["solver"]["weight_floor"], jobs)


@_timed
def check_three_branches(scan, lowest=2):
    """Exactly three branches above the weight floor at the lowest currents."""
    counts = [(e.current, e.branches()) for e in scan.entries[:lowest]]
    ok = bool(counts) and all(len(b) == 3 for _, b in counts)
    txt = ", ".join(f"{I / MA:g} mA: {'/'.join(b) or e_status(scan, I)}" for I, b in counts)
    return CheckResult("spectroscopy_three_branches", ok, txt, len(counts))


def e_status(scan, I):
    return scan.entry(I).status


@_timed
def check_strongest_order(scan, current=60e-3, expected=2):
    """Order of the strongest line at the top current."""
    e = scan.entry(current)
    if e.status != "ok" or not e.lines:
        return CheckResult("spectroscopy_strongest_order", False, f"no lines at {current / MA:g} mA ({e.status})")
    n = strongest_order(e.lines)
    ranked = sorted(e.lines, key=lambda l: -l.weight)[:4]
    top = ", ".join(f"{l.tag} {l.weight / ranked[0].weight:.2g}" for l in ranked)
    return CheckResult("spectroscopy_strongest_order", n == expected,
                       f"strongest n = {n} at {e.current / MA:g} mA (expected {expected}); top lines {top}", 1, n)


@_timed
def check_bloch_siegert_scan(scan, band=(5e3, 20e3)):
    """Largest |nu_full - nu_rwa| over the current sweep."""
    vals = [(e.shifts.max_abs, e.current) for e in scan.entries if e.status == "ok" and e.shifts]
    if not vals:
        return CheckResult("spectroscopy_bloch_siegert", False, "no successful currents")
    m, I = max(vals)
    return CheckResult("spectroscopy_bloch_siegert", band[0] <= m <= band[1],
                       f"max shift {m / KHZ:.2f} kHz at {I / MA:g} mA (band {band[0] / KHZ:g}-{band[1] / KHZ:g} kHz)",
                       len(vals), m)


@_timed
def check_selection_rule(cases=20, seed=0, cfg=None, tol=1e-10):
    """Weights with |dm~| >= 2 relative to the largest weight."""
    cfg = cfg or cfgmod.load("paper_fig1b")
    base = cfgmod.scenario_from(cfg)
    rng = np.random.default_rng([seed, 7])
    worst = 0.0
    for _ in range(cases):
        I = float(rng.uniform(5e-3, 62e-3))
        sc = base.with_currents(I, I * float(rng.uniform(0.8, 1.2)))
        point = np.asarray(base.line_origin) + rng.uniform(-5e-6, 5e-6, size=3) * np.array([1.0, 0.2, 1.0])
        spec = labeled_spectrum(sc, point, pad=LABEL_PAD)
        B = (rng.normal(size=3) + 1j * rng.normal(size=3)) * 1e-7
        lines = transition_elements(spec, spec.H.local.project(B), sc.atom, weight_floor=0.0, include_intra=True)
        wmax = max(l.weight for l in lines)
        bad = [l.weight for l in lines if abs(l.to_label[0] - l.from_label[0]) >= 2]
        worst = max(worst, max(bad, default=0.0) / wmax)
    return CheckResult("selection_rule", worst <= tol,
                       f"{cases} cases, worst forbidden/max weight {worst:.2e} (tol {tol:g})", cases, worst)


@_timed
def check_truncation(cfgs=None, currents=(20e-3, 40e-3, 60e-3), dn=(12, 14), tol=1e-8):
    """Central-manifold energies for two photon cutoffs at the trap minimum."""
    cfgs = cfgs or [cfgmod.load("paper_fig1b"), cfgmod.load("paper_fig4")]
    worst = 0.0
    n = 0
    for cfg in cfgs:
        sc0 = cfgmod.scenario_from(cfg)
        F = sc0.atom.F
        k0 = central_kappa(F)
        for I in currents:
            sc = sc0.with_currents(I, I)
            pot = potential_curve(sc, m_tilde=F, model="full", positions=sc.line(num=41)[1])
            p = pot.positions[int(np.argmin(pot.values))]
            e = []
            for d in dn:
                spec = labeled_spectrum(sc.with_dn_max(d), p)
                e.append(np.array([spec.energy(m, k0) for m in np.arange(-F, F + 0.5)]))
            worst = max(worst, np.abs(e[0] - e[1]).max() / sc.nu_rf)
            n += 1
    return CheckResult("truncation_convergence", worst <= tol,
                       f"{n} points, worst shift {worst:.2e} nu_rf between dN_max {dn[0]} and {dn[1]} (tol {tol:g})",
                       n, worst)


@_timed
def check_fit_falsification(cfg=None, currents=None, low_rabi=0.1, min_max=5e3, max_low=1e3, jobs=1):
    """RWA fit to full-model lines: large residual at strong drive, small at weak drive.

    Weak drive means a center Rabi frequency Omega/nu_rf <= ``low_rabi``.
    """
    cfg = cfg or cfgmod.load("paper_fig4")
    sc = cfgmod.scenario_from(cfg)
    currents = np.arange(5, 61, 5) * MA if currents is None else np.asarray(currents, float)
    data = synthesize_dataset(sc, currents, "full", jobs=jobs)
    res = fit_model(data, sc, "rwa", cfg["fit"]["initial"], cfg["fit"]["max_iter"], jobs=jobs)
    per_amp = _center_rabi_per_amp(sc)
    low = [k for k, o in enumerate(data.rows) if per_amp * o.current / sc.nu_rf <= low_rabi]
    mx = float(np.abs(res.residuals).max())
    lo = float(np.abs(res.residuals[low]).max()) if low else math.nan
    ok = mx >= min_max and bool(low) and lo <= max_low
    return CheckResult("fit_falsification", ok,
                       f"max residual {mx / KHZ:.2f} kHz (need >= {min_max / KHZ:g}), weak-drive residual "
                       f"{lo / KHZ:.2f} kHz over {len(low)} rows (need <= {max_low / KHZ:g}); params "
                       + ", ".join(f"{k}={v:.5f}" for k, v in res.params.items()),
                       len(data), mx, data={"fit": res, "dataset": data})


SUITES = ("oracle", "rwa", "scaling", "bloch_siegert", "potentials", "spectroscopy", "selection",
          "truncation", "fit")


def run_suites(cases=20, seed=0, jobs=1, only=None, reduced=True):
    """Run the named suites; ``reduced`` trims the sweeps for quick runs."""
    only = SUITES if only is None else tuple(only)
    out = []

    def guard(fn, *a, **kw):
        try:
            return [fn(*a, **kw)]
        except DressError as exc:
            return [CheckResult(fn.__name__.replace("check_", ""), False, f"{type(exc).__name__}: {exc}")]

    if "oracle" in only:
        out += guard(check_oracle_equivalence, cases, seed, jobs)
    if "rwa" in only:
        out += guard(check_rwa_equivalence, cases, seed)
    if "scaling" in only:
        out += guard(check_rwa_scaling)
    if "bloch_siegert" in only:
        out += guard(check_bloch_siegert_two_level)
    if "potentials" in only:
        out += guard(check_scenario_potentials)
    if "spectroscopy" in only:
        cur = np.array([2.5, 5.0, 60.0]) * MA if reduced else None
        try:
            scan = scenario_scan(currents=cur, jobs=jobs)
            out += [check_three_branches(scan), check_strongest_order(scan), check_bloch_siegert_scan(scan)]
        except DressError as exc:
            out.append(CheckResult("spectroscopy", False, f"{type(exc).__name__}: {exc}"))
    if "selection" in only:
        out += guard(check_selection_rule, cases, seed)
    if "truncation" in only:
        out += guard(check_truncation, currents=(60e-3,) if reduced else (20e-3, 40e-3, 60e-3))
    if "fit" in only:
        cur = np.array([5.0, 20.0, 40.0, 60.0]) * MA if reduced else None
        out += guard(check_fit_falsification, currents=cur, jobs=jobs)
    return out
