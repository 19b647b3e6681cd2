"""Static, RF and spectroscopy magnetic fields of the atom-chip geometry.

Wires are infinitely long and straight. A wire of zero width is a line current;
a positive width gives a flat strip of uniform surface current lying in the
plane spanned by its axis and the in-plane width direction.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .constants import MU0, MU_B, H_PLANCK, Atom
from .errors import ConfigError, DomainError, InvalidArgumentError, SingularityError

ROLES = ("static", "rf_A", "rf_B", "spectroscopy")
_AXIS_EPS = 1e-9


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if v.shape != (3,) or not np.isfinite(n) or n == 0:
        raise InvalidArgumentError(f"{name} must be a finite non-zero 3-vector")
    return v / n


@dataclass(frozen=True)
class WireSpec:
    """An infinite straight wire.

    ``center`` is any point on the wire's center line (m). For ``width > 0`` the
    strip lies in the plane containing the axis and ``width_direction``, which
    defaults to ``axis x plane_normal`` with the chip normal along +z.
    """

    center: tuple
    axis: tuple = (0.0, 1.0, 0.0)
    width: float = 0.0
    current: float = 0.0
    role: str = "static"
    rf_phase: float = 0.0
    plane_normal: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidArgumentError(f"unknown wire role {self.role!r}")
        if not (self.width >= 0 and math.isfinite(self.width)):
            raise InvalidArgumentError("wire width must be finite and >= 0")
        if not math.isfinite(self.current):
            raise InvalidArgumentError("wire current must be finite")
        object.__setattr__(self, "axis", tuple(_unit(self.axis, "wire axis")))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def frame(self):
        """(u, v, a): width direction, strip normal, axis; right-handed."""
        a = np.asarray(self.axis)
        u = np.cross(a, _unit(self.plane_normal, "plane normal"))
        if np.linalg.norm(u) < 1e-12:
            raise InvalidArgumentError("wire axis parallel to chip normal")
        u /= np.linalg.norm(u)
        v = np.cross(a, u)
        return u, v, a

    def with_current(self, current):
        return replace(self, current=float(current))

    @property
    def phasor_current(self):
        if self.role in ("rf_B", "spectroscopy"):
            return self.current * complex(math.cos(self.rf_phase), math.sin(self.rf_phase))
        return complex(self.current)


@dataclass(frozen=True)
class BiasField:
    vector: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        v = tuple(float(x) for x in self.vector)
        if len(v) != 3 or not all(math.isfinite(x) for x in v):
            raise InvalidArgumentError("bias field must be a finite 3-vector")
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class IoffeTrapModel:
    """Ioffe-Pritchard trap: |B| = sqrt(B_min^2 + G^2 rho^2).

    The quadrupole part is ``G [(u.e_b) e_a + (u.e_a) e_b]`` with ``e_a`` the
    configured quadrupole axis and ``e_b = ioffe_axis x e_a``. Axial curvature
    is ignored.
    """

    B_min: float
    gradient: float
    center: tuple = (0.0, 0.0, 0.0)
    ioffe_axis: tuple = (0.0, 1.0, 0.0)
    quadrupole_axis: tuple = (1.0, 0.0, 0.0)
    transverse_frequency: float = float("nan")
    axial_frequency: float = float("nan")

    def __post_init__(self):
        if not self.B_min > 0:
            raise InvalidArgumentError("B_min must be positive")
        if not self.gradient >= 0:
            raise InvalidArgumentError("gradient must be >= 0")
        ax = _unit(self.ioffe_axis, "ioffe axis")
        qa = np.asarray(self.quadrupole_axis, dtype=float)
        qa = qa - ax * (qa @ ax)
        if np.linalg.norm(qa) < 1e-9:
            raise InvalidArgumentError("quadrupole axis parallel to Ioffe axis")
        object.__setattr__(self, "ioffe_axis", tuple(ax))
        object.__setattr__(self, "quadrupole_axis", tuple(qa / np.linalg.norm(qa)))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def from_frequencies(cls, larmor, transverse_frequency, atom: Atom, m_F=None, **kw):
        """Build from the Larmor frequency at the minimum (Hz) and the
        transverse trap frequency (rad/s) of the state ``m_F`` (default F)."""
        m_F = atom.F if m_F is None else m_F
        B_min = H_PLANCK * larmor / (abs(atom.g_F) * MU_B)
        moment = abs(atom.g_F) * MU_B * m_F
        G = transverse_frequency * math.sqrt(atom.mass * B_min / moment)
        return cls(B_min=B_min, gradient=G, transverse_frequency=transverse_frequency, **kw)

    def field(self, point):
        a = np.asarray(self.ioffe_axis)
        ea = np.asarray(self.quadrupole_axis)
        eb = np.cross(a, ea)
        u = np.asarray(point, dtype=float) - np.asarray(self.center)
        return self.B_min * a + self.gradient * ((u @ eb) * ea + (u @ ea) * eb)


def thin_wire_field(point, wire: WireSpec, current=None):
    """Biot-Savart field of an infinite line current (T).

    ``current`` overrides ``wire.current`` and may be complex (phasor).
    """
    I = wire.current if current is None else current
    p = np.asarray(point, dtype=float)
    a = np.asarray(wire.axis)
    r = p - np.asarray(wire.center)
    r = r - a * (r @ a)
    d2 = r @ r
    if d2 <= _AXIS_EPS**2:
        raise SingularityError(f"point {p.tolist()} lies on the wire axis")
    return (MU0 * I / (2 * math.pi)) * np.cross(a, r) / d2


def ribbon_field(point, wire: WireSpec, current=None):
    """Field of a flat strip of width ``wire.width`` with uniform surface current."""
    if not wire.width > 0:
        raise InvalidArgumentError("ribbon_field needs a positive width")
    I = wire.current if current is None else current
    u_hat, v_hat, a = wire.frame()
    r = np.asarray(point, dtype=float) - np.asarray(wire.center)
    u, v = r @ u_hat, r @ v_hat
    half = 0.5 * wire.width
    k = MU0 * I / (2 * math.pi * wire.width)
    if abs(v) < _AXIS_EPS:
        if abs(u) <= half:
            raise DomainError(f"point {np.asarray(point).tolist()} lies inside the conductor")
        Bu = 0.0
    else:
        Bu = -k * (math.atan((u + half) / v) - math.atan((u - half) / v))
    Bv = 0.5 * k * math.log(((u + half) ** 2 + v**2) / ((u - half) ** 2 + v**2))
    return Bu * u_hat + Bv * v_hat


def wire_field(point, wire: WireSpec, current=None):
    if wire.width > 0:
        return ribbon_field(point, wire, current)
    return thin_wire_field(point, wire, current)


@dataclass(frozen=True)
class WireTrap:
    """Static trap made of DC wires plus a homogeneous bias field."""

    wires: tuple = ()
    bias: BiasField = field(default_factory=BiasField)

    def field(self, point):
        B = np.array(self.bias.vector, dtype=float)
        for w in self.wires:
            B = B + wire_field(point, w)
        return B


@dataclass(frozen=True)
class FieldSample:
    """Fields at one point. Physical RF field is Re[B_rf exp(i w t)]."""

    position: np.ndarray
    B_static: np.ndarray
    B_rf: np.ndarray
    B_spec: np.ndarray


@dataclass(frozen=True)
class FieldConfig:
    """Complete field source description.

    ``spec_vector`` (complex 3-vector, T) overrides the spectroscopy wire.
    """

    static: object
    rf_wires: tuple = ()
    spectroscopy: WireSpec = None
    spec_vector: tuple = None

    def __post_init__(self):
        if self.static is None:
            raise ConfigError("no static field source configured")
        if isinstance(self.static, WireTrap) and not self.static.wires and not any(self.static.bias.vector):
            raise ConfigError("static wire trap has no sources")

    def rf_wire(self, role):
        for w in self.rf_wires:
            if w.role == role:
                return w
        return None

    def with_rf_currents(self, I_A, I_B):
        wires = []
        for w in self.rf_wires:
            if w.role == "rf_A":
                w = w.with_current(I_A)
            elif w.role == "rf_B":
                w = w.with_current(I_B)
            wires.append(w)
        return replace(self, rf_wires=tuple(wires))

    def sample(self, point) -> FieldSample:
        p = np.asarray(point, dtype=float)
        return FieldSample(p, static_field(p, self), rf_phasor(p, self), spectroscopy_phasor(p, self))


def static_field(point, config: FieldConfig):
    """Static field from an IoffeTrapModel or a WireTrap."""
    src = config.static
    if isinstance(src, (IoffeTrapModel, WireTrap)):
        return src.field(point)
    raise ConfigError(f"unsupported static model {type(src).__name__}")


def rf_phasor(point, config: FieldConfig):
    """Complex RF amplitude B_A + B_B exp(i delta); the phase lives on the rf_B wire."""
    B = np.zeros(3, dtype=complex)
    for w in config.rf_wires:
        if w.role not in ("rf_A", "rf_B"):
            raise ConfigError(f"wire with role {w.role!r} in the RF wire list")
        B = B + wire_field(point, w, w.phasor_current)
    return B


def spectroscopy_phasor(point, config: FieldConfig):
    if config.spec_vector is not None:
        return np.asarray(config.spec_vector, dtype=complex)
    if config.spectroscopy is None:
        return np.zeros(3, dtype=complex)
    w = config.spectroscopy
    return wire_field(point, w, w.phasor_current).astype(complex)
