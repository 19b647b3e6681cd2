"""Least-squares fits of resonance models to spectroscopy data.

Free parameters are dimensionless multipliers on the configured RF wire
currents: "scale_A" and "scale_B", or a single shared "scale".
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import io

import numpy as np

from .constants import KHZ, MA
from .errors import DegenerateFitError, InvalidArgumentError
from .spectroscopy import DEFAULT_WEIGHT_FLOOR, trap_point

PARAM_NAMES = ("scale", "scale_A", "scale_B")
CSV_COLUMNS = ("I_RF_mA", "nu_kHz", "sigma_kHz", "branch")


@dataclass(frozen=True)
class Observation:
    current: float  # A
    frequency: float  # Hz
    sigma: float  # Hz
    branch: str = ""

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgumentError("sigma must be positive")
        if not self.frequency >= 0:
            raise InvalidArgumentError("observed frequency must be >= 0")


@dataclass(frozen=True)
class ResonanceDataset:
    rows: tuple

    def __len__(self):
        return len(self.rows)

    @property
    def currents(self):
        return np.array([r.current for r in self.rows])

    @property
    def frequencies(self):
        return np.array([r.frequency for r in self.rows])

    @property
    def sigmas(self):
        return np.array([r.sigma for r in self.rows])

    def scaled_sigma(self, factor):
        return ResonanceDataset(tuple(Observation(r.current, r.frequency, r.sigma * factor, r.branch)
                                      for r in self.rows))


@dataclass
class FitResult:
    params: dict
    rss: float
    residuals: np.ndarray  # Hz, model - observed
    converged: bool
    iterations: int
    rss_history: list = field(default_factory=list)
    flagged: list = field(default_factory=list)  # rows assigned beyond 3 sigma
    assigned: list = field(default_factory=list)  # model line tag per row
    gradient_norm: float = float("nan")


def _currents_for(params, I):
    if "scale" in params:
        return params["scale"] * I, params["scale"] * I
    return params.get("scale_A", 1.0) * I, params.get("scale_B", 1.0) * I


def _lines_at(args):
    scenario, model, I_A, I_B, weight_floor = args
    sc = scenario.with_currents(I_A, I_B)
    return [(l.frequency, l.tag) for l in trap_point(sc, model, weight_floor).lines]


class ResonanceModel:
    """Line frequencies of one model at the trap minimum, per current."""

    def __init__(self, scenario, model="rwa", weight_floor=DEFAULT_WEIGHT_FLOOR, jobs=1):
        if model not in ("rwa", "full"):
            raise InvalidArgumentError(f"unknown model {model!r}")
        self.scenario = scenario
        self.model = model
        self.weight_floor = weight_floor
        self.jobs = jobs

    def lines(self, params, currents):
        """List (per current) of (frequency, tag) pairs."""
        tasks = [(self.scenario, self.model, *_currents_for(params, I), self.weight_floor) for I in currents]
        if self.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                return list(pool.map(_lines_at, tasks))
        return [_lines_at(t) for t in tasks]


def _assign(lines, obs: Observation):
    """Nearest model line with the observation's tag, else nearest overall."""
    if not lines:
        raise InvalidArgumentError(f"model has no lines at I = {obs.current:g} A")
    pool = [l for l in lines if obs.branch and l[1] == obs.branch] or lines
    freq, tag = min(pool, key=lambda l: (abs(l[0] - obs.frequency), l[0]))
    return freq, tag


def evaluate(model: ResonanceModel, params, data: ResonanceDataset):
    """Residuals (Hz) and assigned tags."""
    cur = sorted(set(data.currents.tolist()))
    per = dict(zip(cur, model.lines(params, cur)))
    res = np.empty(len(data))
    tags = []
    for k, obs in enumerate(data.rows):
        f, tag = _assign(per[obs.current], obs)
        res[k] = f - obs.frequency
        tags.append(tag)
    return res, tags


def _step_size(p):
    return 1e-4 * max(abs(p), 1e-3)


def fit_model(data: ResonanceDataset, scenario, model="rwa", initial=None, max_iter=200, jobs=1,
              weight_floor=DEFAULT_WEIGHT_FLOOR):
    """Damped least squares (Levenberg-Marquardt) on sum(((model - obs)/sigma)^2).

    The Jacobian is central-differenced with relative step 1e-4. Stops when the
    relative rss change drops below 1e-10 or the gradient norm below 1e-8.
    """
    initial = dict(initial or {"scale_A": 1.0, "scale_B": 1.0})
    names = [n for n in initial if n in PARAM_NAMES]
    if len(names) != len(initial) or not names:
        raise InvalidArgumentError(f"parameters must be among {PARAM_NAMES}")
    if "scale" in names and len(names) > 1:
        raise InvalidArgumentError("'scale' cannot be combined with per-wire scales")
    if len(data) < len(names):
        raise InvalidArgumentError("fewer observations than free parameters")
    rm = ResonanceModel(scenario, model, weight_floor, jobs)
    sig = data.sigmas

    def weighted(p):
        r, tags = evaluate(rm, dict(zip(names, p)), data)
        return r / sig, r, tags

    p = np.array([float(initial[n]) for n in names])
    wr, r, tags = weighted(p)
    rss = float(wr @ wr)
    history = [rss]
    lam = 1e-3
    converged = False
    gnorm = float("nan")
    it = 0
    while it < max_iter:
        it += 1
        if rss == 0.0:
            converged = True
            break
        J = np.empty((len(wr), len(p)))
        for j in range(len(p)):
            h = _step_size(p[j])
            e = np.zeros(len(p))
            e[j] = h
            J[:, j] = (weighted(p + e)[0] - weighted(p - e)[0]) / (2 * h)
        A = J.T @ J
        g = J.T @ wr
        gnorm = float(np.linalg.norm(g))
        if gnorm < 1e-8:
            converged = True
            break
        dA = np.diag(A).copy()
        if np.any(dA == 0):
            raise DegenerateFitError("Jacobian has a zero column; parameter does not affect the model")
        accepted = False
        while lam <= 1e16:
            step = np.linalg.solve(A + lam * np.diag(dA), -g)
            wr_new, r_new, tags_new = weighted(p + step)
            rss_new = float(wr_new @ wr_new)
            if rss_new < rss:
                accepted = True
                lam = max(lam / 10, 1e-15)
                break
            lam *= 10
        if not accepted:
            # no descent direction left at this resolution
            converged = True
            break
        rel = (rss - rss_new) / rss
        p, wr, r, tags, rss = p + step, wr_new, r_new, tags_new, rss_new
        history.append(rss)
        if rel < 1e-10:
            converged = True
            break
    flagged = [k for k in range(len(data)) if abs(r[k]) > 3 * sig[k]]
    return FitResult(dict(zip(names, p.tolist())), rss, r, converged, it, history, flagged, tags, gnorm)


def synthesize_dataset(scenario, currents, model="full", params=None, tags=("0+", "1+", "1-"),
                       sigma=1e3, weight_floor=DEFAULT_WEIGHT_FLOOR, jobs=1):
    """Noise-free observations of the given line tags, one row per line and current."""
    params = params or {"scale": 1.0}
    rm = ResonanceModel(scenario, model, weight_floor, jobs)
    rows = []
    for I, lines in zip(currents, rm.lines(params, list(currents))):
        for f, tag in sorted(lines):
            if tags is None or tag in tags:
                rows.append(Observation(float(I), float(f), float(sigma), tag))
    return ResonanceDataset(tuple(rows))


def _num(text, row, col):
    try:
        v = float(text)
    except ValueError:
        raise InvalidArgumentError(f"row {row}, column {col}: not a number: {text!r}") from None
    if not np.isfinite(v):
        raise InvalidArgumentError(f"row {row}, column {col}: not finite")
    return v


def read_dataset(text):
    """Parse dataset CSV text (comment lines start with '#')."""
    lines = [l for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    if not lines:
        raise InvalidArgumentError("row 1: missing header")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    missing = [c for c in CSV_COLUMNS[:3] if c not in header]
    if missing:
        raise InvalidArgumentError(f"row 1: missing column(s) {', '.join(missing)}")
    idx = {c: header.index(c) for c in CSV_COLUMNS if c in header}
    rows = []
    for r, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise InvalidArgumentError(f"row {r}: expected {len(header)} fields, got {len(rec)}")
        vals = {c: rec[i].strip() for c, i in idx.items()}
        I = _num(vals["I_RF_mA"], r, "I_RF_mA") * MA
        nu = _num(vals["nu_kHz"], r, "nu_kHz") * KHZ
        s = _num(vals["sigma_kHz"], r, "sigma_kHz") * KHZ
        if s <= 0:
            raise InvalidArgumentError(f"row {r}, column sigma_kHz: must be positive")
        if nu < 0:
            raise InvalidArgumentError(f"row {r}, column nu_kHz: must be >= 0")
        rows.append(Observation(I, nu, s, vals.get("branch", "")))
    return ResonanceDataset(tuple(rows))


def format_number(x):
    return f"{x:.12g}"


def write_dataset(data: ResonanceDataset, comments=()):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in data.rows:
        buf.write(",".join([format_number(r.current / MA), format_number(r.frequency / KHZ),
                            format_number(r.sigma / KHZ), r.branch]) + "\n")
    return buf.getvalue()
