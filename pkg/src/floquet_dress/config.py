"""Run configuration: parsing, validation, normalization and hashing.

Configs are JSON objects in user units (gauss, micrometer, kilohertz,
milliampere, degrees). Conversion to SI and Hz happens here and nowhere else.
"""

import copy
import hashlib
from importlib import resources
import json
import math
from pathlib import Path

import numpy as np

from .constants import GAUSS, KHZ, MA, MICRON, Atom
from .errors import ConfigError
from .hamiltonian import Scenario
from .magnetostatics import BiasField, FieldConfig, IoffeTrapModel, WireSpec, WireTrap

AMU = 1.66053906660e-27  # kg

DEFAULTS = {
    "atom": {"F": 2.0, "g_F": 0.5, "mass_amu": 86.909180527},
    "static": {
        "model": "ioffe",
        "B_min_G": 0.9288,
        "gradient_G_per_um": 0.2266,
        "center_um": [0.0, 0.0, -110.0],
        "ioffe_axis": [0.0, 1.0, 0.0],
        "quadrupole_axis": [1.0, 0.0, 0.0],
        "wires": [],
        "bias_G": [0.0, 0.0, 0.0],
    },
    "rf": {
        "nu_kHz": 600.0,
        "I_A_mA": 60.0,
        "I_B_mA": 60.0,
        "delta_deg": 180.0,
        "wires": [
            {"role": "rf_A", "center_um": [-115.0, 0.0, 0.0], "axis": [0.0, 1.0, 0.0], "width_um": 0.0},
            {"role": "rf_B", "center_um": [115.0, 0.0, 0.0], "axis": [0.0, 1.0, 0.0], "width_um": 0.0},
        ],
    },
    "spectroscopy": {
        "mode": "wire",
        "wire": {"center_um": [0.0, 0.0, 1200.0], "axis": [0.0, 1.0, 0.0], "width_um": 0.0,
                 "current_mA": 0.1, "phase_deg": 0.0},
        "vector_G": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
    },
    "solver": {"dN_max": 12, "n_steps": 8, "weight_floor": 1e-4},
    "line": {"origin_um": [0.0, 0.0, -110.0], "direction": [1.0, 0.0, 0.0], "half_width_um": 6.0,
             "points": 121},
    "potential": {"m_tilde": [2.0], "kappa": 0.0},
    "levels": {"kappa_offsets": [-1.0, 0.0, 1.0]},
    "scan": {"currents_mA": [], "window_kHz": [0.0, 2200.0]},
    "fit": {"model": "rwa", "initial": {"scale_A": 1.0, "scale_B": 1.0}, "max_iter": 200},
}

_SECTIONS = tuple(DEFAULTS)


def _merge(base, over, path):
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"unknown key {where!r}")
        if isinstance(base[k], dict) and k not in ("initial",):
            if not isinstance(v, dict):
                raise ConfigError(f"{where} must be an object")
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _num(v, where, lo=None, hi=None, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{where} must be positive")
    if lo is not None and v < lo:
        raise ConfigError(f"{where} must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{where} must be <= {hi}")
    if integer:
        if v != int(v):
            raise ConfigError(f"{where} must be an integer")
        return int(v)
    return v


def _vec(v, where, n=3, nonzero=False):
    if not isinstance(v, (list, tuple)) or len(v) != n:
        raise ConfigError(f"{where} must be a list of {n} numbers")
    out = [_num(x, f"{where}[{i}]") for i, x in enumerate(v)]
    if nonzero and not any(out):
        raise ConfigError(f"{where} must be non-zero")
    return out


def _wire(w, where, role=None, with_current=False):
    if not isinstance(w, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = {"role", "center_um", "axis", "width_um", "current_mA", "phase_deg"}
    extra = set(w) - allowed
    if extra:
        raise ConfigError(f"unknown key {where}.{sorted(extra)[0]}")
    out = {
        "center_um": _vec(w.get("center_um", [0.0, 0.0, 0.0]), f"{where}.center_um"),
        "axis": _vec(w.get("axis", [0.0, 1.0, 0.0]), f"{where}.axis", nonzero=True),
        "width_um": _num(w.get("width_um", 0.0), f"{where}.width_um", lo=0.0),
    }
    if role is not None:
        r = w.get("role", role)
        if r not in role.split("|"):
            raise ConfigError(f"{where}.role must be one of {role.split('|')}")
        out["role"] = r
    if with_current:
        out["current_mA"] = _num(w.get("current_mA", 0.0), f"{where}.current_mA")
        out["phase_deg"] = _num(w.get("phase_deg", 0.0), f"{where}.phase_deg")
    return out


def normalize(raw):
    """Validated config with every default filled in and numbers as floats."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    c = _merge(DEFAULTS, raw, "")
    a = c["atom"]
    a["F"] = _num(a["F"], "atom.F", lo=0.5, hi=10)
    if abs(2 * a["F"] - round(2 * a["F"])) > 1e-12:
        raise ConfigError("atom.F must be a half-integer")
    a["g_F"] = _num(a["g_F"], "atom.g_F")
    if a["g_F"] == 0:
        raise ConfigError("atom.g_F must be non-zero")
    a["mass_amu"] = _num(a["mass_amu"], "atom.mass_amu", positive=True)

    s = c["static"]
    if s["model"] not in ("ioffe", "wires"):
        raise ConfigError("static.model must be 'ioffe' or 'wires'")
    s["B_min_G"] = _num(s["B_min_G"], "static.B_min_G", positive=True)
    s["gradient_G_per_um"] = _num(s["gradient_G_per_um"], "static.gradient_G_per_um", lo=0.0)
    s["center_um"] = _vec(s["center_um"], "static.center_um")
    s["ioffe_axis"] = _vec(s["ioffe_axis"], "static.ioffe_axis", nonzero=True)
    s["quadrupole_axis"] = _vec(s["quadrupole_axis"], "static.quadrupole_axis", nonzero=True)
    s["bias_G"] = _vec(s["bias_G"], "static.bias_G")
    if not isinstance(s["wires"], list):
        raise ConfigError("static.wires must be a list")
    s["wires"] = [_wire(w, f"static.wires[{i}]", with_current=True) for i, w in enumerate(s["wires"])]
    for w in s["wires"]:
        w.pop("phase_deg")
    if s["model"] == "wires" and not s["wires"] and not any(s["bias_G"]):
        raise ConfigError("static wire trap has no sources")

    r = c["rf"]
    r["nu_kHz"] = _num(r["nu_kHz"], "rf.nu_kHz", positive=True)
    r["I_A_mA"] = _num(r["I_A_mA"], "rf.I_A_mA")
    r["I_B_mA"] = _num(r["I_B_mA"], "rf.I_B_mA")
    r["delta_deg"] = _num(r["delta_deg"], "rf.delta_deg")
    if not isinstance(r["wires"], list) or not r["wires"]:
        raise ConfigError("rf.wires must be a non-empty list")
    r["wires"] = [_wire(w, f"rf.wires[{i}]", role="rf_A|rf_B") for i, w in enumerate(r["wires"])]
    roles = [w["role"] for w in r["wires"]]
    if len(set(roles)) != len(roles):
        raise ConfigError("rf.wires roles must be distinct")

    sp = c["spectroscopy"]
    if sp["mode"] not in ("wire", "vector"):
        raise ConfigError("spectroscopy.mode must be 'wire' or 'vector'")
    sp["wire"] = _wire(sp["wire"], "spectroscopy.wire", with_current=True)
    vg = sp["vector_G"]
    if not isinstance(vg, list) or len(vg) != 3:
        raise ConfigError("spectroscopy.vector_G must be three [re, im] pairs")
    sp["vector_G"] = [_vec(p, f"spectroscopy.vector_G[{i}]", n=2) for i, p in enumerate(vg)]

    so = c["solver"]
    so["dN_max"] = _num(so["dN_max"], "solver.dN_max", lo=1, hi=100, integer=True)
    so["n_steps"] = _num(so["n_steps"], "solver.n_steps", lo=2, hi=512, integer=True)
    so["weight_floor"] = _num(so["weight_floor"], "solver.weight_floor", lo=0.0, hi=0.999999)

    ln = c["line"]
    ln["origin_um"] = _vec(ln["origin_um"], "line.origin_um")
    ln["direction"] = _vec(ln["direction"], "line.direction", nonzero=True)
    ln["half_width_um"] = _num(ln["half_width_um"], "line.half_width_um", positive=True)
    ln["points"] = _num(ln["points"], "line.points", lo=3, hi=100001, integer=True)

    F = a["F"]
    p = c["potential"]
    mts = p["m_tilde"] if isinstance(p["m_tilde"], list) else [p["m_tilde"]]
    p["m_tilde"] = [_num(m, "potential.m_tilde", lo=-F, hi=F) for m in mts]
    if not p["m_tilde"]:
        raise ConfigError("potential.m_tilde must not be empty")
    p["kappa"] = _num(p["kappa"], "potential.kappa")

    lv = c["levels"]
    if not isinstance(lv["kappa_offsets"], list) or not lv["kappa_offsets"]:
        raise ConfigError("levels.kappa_offsets must be a non-empty list")
    lv["kappa_offsets"] = [_num(k, "levels.kappa_offsets") for k in lv["kappa_offsets"]]

    sc = c["scan"]
    cur = sc["currents_mA"]
    if isinstance(cur, dict):
        start = _num(cur.get("start", 0.0), "scan.currents_mA.start")
        stop = _num(cur.get("stop", 0.0), "scan.currents_mA.stop")
        step = _num(cur.get("step", 1.0), "scan.currents_mA.step", positive=True)
        n = int(math.floor((stop - start) / step + 1e-9)) + 1 if stop >= start else 0
        cur = [round(start + k * step, 9) for k in range(n)]
    if not isinstance(cur, list):
        raise ConfigError("scan.currents_mA must be a list or {start, stop, step}")
    sc["currents_mA"] = [_num(x, f"scan.currents_mA[{i}]") for i, x in enumerate(cur)]
    if any(b <= a_ for a_, b in zip(sc["currents_mA"], sc["currents_mA"][1:])):
        raise ConfigError("scan.currents_mA must be strictly increasing")
    sc["window_kHz"] = _vec(sc["window_kHz"], "scan.window_kHz", n=2)
    if not 0 <= sc["window_kHz"][0] < sc["window_kHz"][1]:
        raise ConfigError("scan.window_kHz must satisfy 0 <= lo < hi")

    f = c["fit"]
    if f["model"] not in ("rwa", "full"):
        raise ConfigError("fit.model must be 'rwa' or 'full'")
    if not isinstance(f["initial"], dict) or not f["initial"]:
        raise ConfigError("fit.initial must be a non-empty object")
    for k in f["initial"]:
        if k not in ("scale", "scale_A", "scale_B"):
            raise ConfigError(f"unknown fit parameter {k!r}")
    if "scale" in f["initial"] and len(f["initial"]) > 1:
        raise ConfigError("fit.initial: 'scale' cannot be combined with per-wire scales")
    f["initial"] = {k: _num(v, f"fit.initial.{k}") for k, v in sorted(f["initial"].items())}
    f["max_iter"] = _num(f["max_iter"], "fit.max_iter", lo=1, hi=10000, integer=True)
    return c


def serialize(cfg):
    """Canonical JSON text of a normalized config."""
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


def config_hash(cfg):
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def preset_names():
    root = resources.files("floquet_dress") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_text(source):
    """Config text from a path or a bundled preset name."""
    path = Path(source)
    if path.is_file():
        return path.read_text()
    name = source[:-5] if str(source).endswith(".json") else str(source)
    res = resources.files("floquet_dress") / "presets" / f"{name}.json"
    if res.is_file():
        return res.read_text()
    raise ConfigError(f"config {source!r} is neither a file nor a preset ({', '.join(preset_names())})")


def parse(text):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return normalize(raw)


def load(source):
    return parse(load_text(source))


def atom_from(cfg):
    a = cfg["atom"]
    return Atom(F=a["F"], g_F=a["g_F"], mass=a["mass_amu"] * AMU)


def _um(v):
    return tuple(x * MICRON for x in v)


def fields_from(cfg):
    s = cfg["static"]
    if s["model"] == "ioffe":
        static = IoffeTrapModel(B_min=s["B_min_G"] * GAUSS, gradient=s["gradient_G_per_um"] * GAUSS / MICRON,
                                center=_um(s["center_um"]), ioffe_axis=tuple(s["ioffe_axis"]),
                                quadrupole_axis=tuple(s["quadrupole_axis"]))
    else:
        wires = tuple(WireSpec(center=_um(w["center_um"]), axis=tuple(w["axis"]), width=w["width_um"] * MICRON,
                               current=w["current_mA"] * MA, role="static") for w in s["wires"])
        static = WireTrap(wires, BiasField(tuple(b * GAUSS for b in s["bias_G"])))
    r = cfg["rf"]
    rf = []
    for w in r["wires"]:
        I = r["I_A_mA"] if w["role"] == "rf_A" else r["I_B_mA"]
        rf.append(WireSpec(center=_um(w["center_um"]), axis=tuple(w["axis"]), width=w["width_um"] * MICRON,
                           current=I * MA, role=w["role"],
                           rf_phase=math.radians(r["delta_deg"]) if w["role"] == "rf_B" else 0.0))
    sp = cfg["spectroscopy"]
    spec_wire, spec_vec = None, None
    if sp["mode"] == "wire":
        w = sp["wire"]
        spec_wire = WireSpec(center=_um(w["center_um"]), axis=tuple(w["axis"]), width=w["width_um"] * MICRON,
                             current=w["current_mA"] * MA, role="spectroscopy",
                             rf_phase=math.radians(w["phase_deg"]))
    else:
        spec_vec = tuple(complex(re, im) * GAUSS for re, im in sp["vector_G"])
    return FieldConfig(static, tuple(rf), spec_wire, spec_vec)


def scenario_from(cfg, dn_max=None) -> Scenario:
    ln = cfg["line"]
    so = cfg["solver"]
    return Scenario(atom=atom_from(cfg), fields=fields_from(cfg), nu_rf=cfg["rf"]["nu_kHz"] * KHZ,
                    dN_max=so["dN_max"] if dn_max is None else int(dn_max), n_steps=so["n_steps"],
                    line_origin=_um(ln["origin_um"]), line_direction=tuple(ln["direction"]),
                    line_half_width=ln["half_width_um"] * MICRON, line_points=ln["points"])


def scan_currents(cfg):
    """Scan currents in A (I_A = I_B = I_RF)."""
    return np.array(cfg["scan"]["currents_mA"], float) * MA


def scan_window(cfg):
    lo, hi = cfg["scan"]["window_kHz"]
    return lo * KHZ, hi * KHZ
