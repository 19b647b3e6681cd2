"""Command-line entry point: floquet-dress {potential,levels,scan,fit,selftest}."""

import argparse
import json
import os
from pathlib import Path
import sys

import numpy as np

from . import checks
from . import config as cfgmod
from .constants import KHZ, MA, MICRON
from .errors import DressError, FitNonConvergenceError, InvalidArgumentError, TopologyError
from .fitting import fit_model, read_dataset
from .hamiltonian import central_kappa
from .solver import LevelTracker, double_well_metrics, potential_curve, trap_minimum
from .spectroscopy import scan_resonances

SEED_ENV = "FLOQUET_DRESS_SEED"


def fmt(x):
    """12 significant digits, no locale, empty for None."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0:
        return "0"
    return f"{x:.12g}"


class CsvWriter:
    """Plain CSV with a leading '#' comment block and LF line endings."""

    def __init__(self, command, cfg, columns):
        self.lines = [f"# floquet_dress {command}", f"# config_sha256 {cfgmod.config_hash(cfg)}"]
        self.columns = list(columns)
        self.rows = []
        self.footer = []

    def row(self, *values):
        if len(values) != len(self.columns):
            raise InvalidArgumentError("row width does not match header")
        self.rows.append(",".join(fmt(v) for v in values))

    def text(self):
        return "\n".join(self.lines + [",".join(self.columns)] + self.rows + self.footer) + "\n"

    def save(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write(self.text())
        return path


def _out(args, name):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _config(args):
    cfg = cfgmod.load(args.config)
    if args.dn_max is not None:
        cfg["solver"]["dN_max"] = args.dn_max
    if args.weight_floor is not None:
        cfg["solver"]["weight_floor"] = args.weight_floor
    return cfgmod.normalize(cfg)


def _ratio(a, b):
    return fmt(a / b) if b > 0 else "inf"


def run_potential(cfg, args):
    sc = cfgmod.scenario_from(cfg)
    F = sc.atom.F
    kappa = cfg["potential"]["kappa"] + central_kappa(F)
    coords, positions = sc.line()
    mts = cfg["potential"]["m_tilde"]
    full, rwa = {}, {}
    for m in sorted(set(mts) | {F}):
        full[m] = potential_curve(sc, coords, m, kappa, "full", positions)
        rwa[m] = potential_curve(sc, coords, m, kappa, "rwa", positions)
    ref_full = trap_minimum(full[F])[1]
    ref_rwa = trap_minimum(rwa[F])[1]
    cols = ["position_um"]
    single = len(mts) == 1
    for m in mts:
        sfx = "" if single else f"_m{fmt(m)}"
        cols += [f"V_full_kHz{sfx}", f"V_rwa_kHz{sfx}"]
    w = CsvWriter("potential", cfg, cols)
    for k, x in enumerate(coords):
        vals = [x / MICRON]
        for m in mts:
            vals += [(full[m].values[k] - ref_full) / KHZ, (rwa[m].values[k] - ref_rwa) / KHZ]
        w.row(*vals)
    try:
        mf = double_well_metrics(full[F])
        mr = double_well_metrics(rwa[F])
        w.footer += ["# metrics",
                     f"# splitting_um {fmt(mf.splitting / MICRON)}",
                     f"# splitting_rwa_um {fmt(mr.splitting / MICRON)}",
                     f"# barrier_full_kHz {fmt(mf.barrier / KHZ)}",
                     f"# barrier_rwa_kHz {fmt(mr.barrier / KHZ)}",
                     f"# barrier_ratio_full_over_rwa {_ratio(mf.barrier, mr.barrier)}",
                     f"# barrier_ratio_max_over_min {_ratio(max(mf.barrier, mr.barrier), min(mf.barrier, mr.barrier))}",
                     f"# asymmetry_full_kHz {fmt(mf.asymmetry / KHZ)}"]
    except TopologyError as exc:
        w.footer += ["# metrics", f"# unavailable: {exc}"]
    return [w.save(_out(args, "potential.csv"))]


def run_levels(cfg, args):
    sc = cfgmod.scenario_from(cfg)
    F = sc.atom.F
    k0 = central_kappa(F)
    kappas = [k0 + d for d in cfg["levels"]["kappa_offsets"]]
    labels = [(m, k) for k in kappas for m in np.arange(-F, F + 0.5)]
    coords, positions = sc.line()
    tracker = LevelTracker(sc, watch=labels)
    w = CsvWriter("levels", cfg, ["position_um", "m_tilde", "kappa", "energy_kHz"])
    for k, (x, p) in enumerate(zip(coords, positions)):
        spec = tracker.start(p) if k == 0 else tracker.step(p)
        for m, kap in labels:
            w.row(x / MICRON, m, kap, spec.energy(m, kap) / KHZ)
    return [w.save(_out(args, "levels.csv"))]


def run_scan(cfg, args):
    sc = cfgmod.scenario_from(cfg)
    cur = cfgmod.scan_currents(cfg)
    w = CsvWriter("scan", cfg, ["I_RF_mA", "frequency_kHz", "weight", "n", "branch", "bs_shift_kHz", "status"])
    if len(cur):
        res = scan_resonances(sc, cur, cfgmod.scan_window(cfg), cfg["solver"]["weight_floor"], args.jobs)
        for e in res.entries:
            if e.status != "ok":
                w.row(e.current / MA, None, None, None, None, None, e.status)
                continue
            wmax = max((l.weight for l in e.lines), default=0.0)
            for l in e.lines:
                shift = e.shifts.shifts.get((l.from_label, l.to_label))
                w.row(e.current / MA, l.frequency / KHZ, l.weight / wmax, l.order, l.branch,
                      None if shift is None else shift / KHZ, "ok")
    return [w.save(_out(args, "scan.csv"))]


def run_fit(cfg, args):
    if not args.data:
        raise InvalidArgumentError("fit needs --data CSV")
    try:
        text = Path(args.data).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {args.data}: {exc.strerror}") from None
    data = read_dataset(text)
    sc = cfgmod.scenario_from(cfg)
    f = cfg["fit"]
    res = fit_model(data, sc, f["model"], f["initial"], f["max_iter"], args.jobs, cfg["solver"]["weight_floor"])
    w = CsvWriter("fit", cfg, ["I_RF_mA", "nu_obs_kHz", "sigma_kHz", "branch", "assigned", "residual_kHz",
                               "flagged"])
    for k, o in enumerate(data.rows):
        w.row(o.current / MA, o.frequency / KHZ, o.sigma / KHZ, o.branch, res.assigned[k],
              res.residuals[k] / KHZ, "yes" if k in res.flagged else "no")
    report = {
        "config_sha256": cfgmod.config_hash(cfg),
        "model": f["model"],
        "params": {k: float(fmt(v)) for k, v in res.params.items()},
        "rss": float(fmt(res.rss)),
        "converged": res.converged,
        "iterations": res.iterations,
        "max_abs_residual_kHz": float(fmt(np.abs(res.residuals).max() / KHZ)),
        "flagged_rows": res.flagged,
    }
    rpath = _out(args, "fit_report.json")
    with open(rpath, "w", newline="\n") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    paths = [rpath, w.save(_out(args, "fit_residuals.csv"))]
    if not res.converged:
        raise FitNonConvergenceError(f"fit did not converge in {res.iterations} iterations")
    return paths


def _seed():
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def run_selftest(cfg, args):
    if args.cases < 0:
        raise InvalidArgumentError("--cases must be >= 0")
    only = None
    if args.checks:
        only = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = [c for c in only if c not in checks.SUITES]
        if unknown:
            raise InvalidArgumentError(f"unknown check(s) {unknown}; choose from {', '.join(checks.SUITES)}")
    seed = _seed()
    lines = [f"# floquet_dress selftest seed={seed} cases={args.cases}"]
    results = []
    if args.cases == 0:
        lines.append("no cases: nothing was run")
    else:
        results = checks.run_suites(args.cases, seed, args.jobs, only)
        lines += [r.line().rsplit(" [", 1)[0] for r in results]
        for r in results:
            print(r.line(), flush=True)
    failed = [r.name for r in results if not r.passed]
    lines.append(f"summary: {len(results) - len(failed)} passed, {len(failed)} failed"
                 + (f" ({', '.join(failed)})" if failed else ""))
    path = _out(args, "selftest.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(lines[-1] if results else lines[1])
    return failed


COMMANDS = {"potential": run_potential, "levels": run_levels, "scan": run_scan, "fit": run_fit,
            "selftest": run_selftest}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="paper_fig4", help="config file or preset name (default paper_fig4)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--dn-max", type=int, default=None, help="photon-number cutoff override")
    common.add_argument("--weight-floor", type=float, default=None, help="relative line weight floor override")
    ap = argparse.ArgumentParser(prog="floquet-dress", description="RF-dressed adiabatic potentials and spectroscopy")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("potential", parents=[common], help="full and RWA potentials along the scan line")
    sub.add_parser("levels", parents=[common], help="labeled dressed levels along the scan line")
    sub.add_parser("scan", parents=[common], help="spectroscopy lines versus RF current")
    p = sub.add_parser("fit", parents=[common], help="fit a resonance model to a dataset")
    p.add_argument("--data", help="dataset CSV (I_RF_mA, nu_kHz, sigma_kHz, branch)")
    p = sub.add_parser("selftest", parents=[common], help="run the verification suites")
    p.add_argument("--cases", type=int, default=20, help="randomized cases per suite")
    p.add_argument("--checks", default=None, help="comma-separated subset of " + ",".join(checks.SUITES))
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise InvalidArgumentError("--jobs must be >= 1")
        cfg = _config(args)
        out = COMMANDS[args.command](cfg, args)
    except DressError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    if args.command == "selftest":
        return 1 if out else 0
    for p in out:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
