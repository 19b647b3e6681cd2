import copy
import math

import numpy as np
import pytest

from floquet_dress import config as cfgmod
from floquet_dress import spectroscopy as spmod
from floquet_dress.constants import GAUSS, RB87_F2, Atom
from floquet_dress.errors import InvalidArgumentError, TopologyError
from floquet_dress.hamiltonian import build_basis, build_full
from floquet_dress.local_frame import decompose
from floquet_dress.solver import LABEL_PAD, intra_spacing, label_levels, labeled_spectrum, rwa_spectrum
from floquet_dress.spectroscopy import (TransitionLine, bloch_siegert_shift, resonance_chain, resonance_shift,
                                        scan_resonances, strongest_order, transition_elements, trap_point)

Z = np.array([0.0, 0.0, 1.0])
X = np.array([1.0, 0.0, 0.0])
NU = 600e3


def _bare_spec():
    atom = RB87_F2
    B = 650e3 / atom.mu_over_h
    H = build_full(decompose(Z * B, np.zeros(3)), B, NU, atom, build_basis(2, 12, 1))
    return label_levels(H)


def test_zero_dressing_gives_single_larmor_line():
    spec = _bare_spec()
    Bx = 1e-8
    lines = transition_elements(spec, np.array([Bx, 0, 0]), RB87_F2, weight_floor=0.0)
    assert len(lines) == 1
    (l,) = lines
    assert l.frequency == pytest.approx(650e3, rel=1e-12)
    assert l.to_label == (1.0, -1.0) and l.tag == "1+"
    assert l.weight == pytest.approx((RB87_F2.mu_over_h * Bx * 1.0) ** 2, rel=1e-12)


def test_zero_dressing_ladder_weights():
    spec = _bare_spec()
    # from m = 1 (kappa = -1): up to m = 2 with |<2|Fx|1>|^2 = 1, down to m = 0 with 6/4
    lines = transition_elements(spec, np.array([1e-8, 0, 0]), RB87_F2, trapped=(1, -1), weight_floor=0.0)
    w = {l.to_label[0]: l.weight for l in lines}
    assert set(w) == {2.0, 0.0}
    assert w[0.0] / w[2.0] == pytest.approx(1.5, rel=1e-12)
    assert all(l.frequency == pytest.approx(650e3, rel=1e-12) for l in lines)


def test_rwa_levels_give_three_lines(fig4):
    for I in (5e-3, 60e-3):
        sc = fig4.with_currents(I, I)
        spec = rwa_spectrum(sc.hamiltonian(sc.line_origin))
        B = np.array([0.3, 0.5, 1.0]) * 1e-8
        lines = transition_elements(spec, spec.H.local.project(B), sc.atom)
        freqs = np.unique(np.round([l.frequency for l in lines], 6))
        assert len(freqs) == 3
        assert sorted(l.tag for l in lines) == ["0+", "1+", "1-"]


def test_selection_rule_at_strong_drive(fig4):
    sc = fig4.with_currents(60e-3, 60e-3)
    spec = labeled_spectrum(sc, sc.line_origin, pad=LABEL_PAD)
    lines = transition_elements(spec, spec.H.B_spec_local, sc.atom, weight_floor=0.0, include_intra=True)
    wmax = max(l.weight for l in lines)
    forbidden = [l.weight for l in lines if abs(l.to_label[0] - l.from_label[0]) >= 2]
    assert forbidden and max(forbidden) <= 1e-10 * wmax


def test_frequencies_are_exact_level_differences(fig4):
    spec = labeled_spectrum(fig4, fig4.line_origin, pad=LABEL_PAD)
    i = spec.find(2, 0)
    for l in transition_elements(spec, spec.H.B_spec_local, fig4.atom):
        f = spec.find(*l.to_label)
        assert l.frequency == abs(spec.energies[f] - spec.energies[i])


def test_weight_scaling_is_quadratic(fig4):
    spec = labeled_spectrum(fig4, fig4.line_origin, pad=LABEL_PAD)
    B = spec.H.B_spec_local
    base = transition_elements(spec, B, fig4.atom)
    for s in (2.0, 0.125, 3.0):
        scaled = transition_elements(spec, s * B, fig4.atom)
        assert [l.frequency for l in scaled] == [l.frequency for l in base]
        for a, b in zip(scaled, base):
            assert a.weight == pytest.approx(s * s * b.weight, rel=1e-13)


def test_rwa_labels_subset_of_full_at_weak_drive(fig4):
    sc = fig4.with_currents(2.5e-3, 2.5e-3)
    full = trap_point(sc, "full", weight_floor=0.0)
    rwa = trap_point(sc, "rwa", weight_floor=0.0)
    full_labels = {l.to_label for l in full.lines if l.order <= 1}
    assert {l.to_label for l in rwa.lines} <= full_labels


def test_resonance_chain_examples():
    assert resonance_chain(0.0, NU, 3) == [0.0, NU, 2 * NU, 3 * NU]
    chain = resonance_chain(150e3, NU, 4)
    assert 1.95e6 in chain and 2.25e6 in chain
    assert chain == sorted(chain) and min(chain) >= 0
    with pytest.raises(InvalidArgumentError):
        resonance_chain(1.0, NU, -1)


def test_chain_matches_full_lines(fig4):
    spec = labeled_spectrum(fig4, fig4.line_origin, pad=LABEL_PAD)
    W = abs(intra_spacing(spec))
    chain = np.array(resonance_chain(W, NU, 6))
    lines = transition_elements(spec, spec.H.B_spec_local, fig4.atom)
    assert len(lines) >= 5
    for l in lines:
        assert np.abs(chain - l.frequency).min() <= 1.0
        sign = 1 if l.branch == "+" else -1
        assert l.frequency == pytest.approx(l.order * NU + sign * W, abs=1.0)


def _line(n, w):
    return TransitionLine(float(n * NU), w, (2, 0), (1, n), n, "+")


def test_strongest_order_rules():
    assert strongest_order([_line(3, 0.2)]) == 3
    assert strongest_order([_line(2, 1.0), _line(1, 1.0), _line(0, 0.5)]) == 1
    with pytest.raises(InvalidArgumentError):
        strongest_order([])


def test_weak_dressing_parallel_probe_prefers_n0(fig4_cfg):
    cfg = copy.deepcopy(fig4_cfg)
    cfg["spectroscopy"]["mode"] = "vector"
    cfg["spectroscopy"]["vector_G"] = [[0, 0], [1e-4, 0], [0, 0]]
    sc = cfgmod.scenario_from(cfgmod.normalize(cfg)).with_currents(5e-3, 5e-3)
    assert strongest_order(trap_point(sc, "full").lines) == 0


def test_bloch_siegert_vanishes_without_drive(fig4):
    sc = fig4.with_currents(1e-6, 1e-6)
    full = trap_point(sc, "full", weight_floor=0.0)
    rwa = trap_point(sc, "rwa", weight_floor=0.0)
    bs = bloch_siegert_shift(full.lines, rwa.lines)
    assert bs.shifts and bs.max_abs <= 1e-3


def test_bloch_siegert_unmatched_reported():
    a = _line(1, 1.0)
    b = TransitionLine(NU + 5.0, 1.0, (2, 0), (1, 1), 1, "+")
    c = _line(2, 1.0)
    bs = bloch_siegert_shift([b, c], [a])
    assert bs.shifts == {((2, 0), (1, 1)): 5.0}
    assert bs.unmatched == [((2, 0), (1, 2))]


@pytest.mark.parametrize("ratio", [0.01, 0.05, 0.1])
def test_two_level_bloch_siegert(ratio):
    rabi = ratio * NU
    assert resonance_shift(rabi, NU) == pytest.approx(rabi**2 / (4 * NU), rel=0.05)


def test_scan_branches_grow_with_current(fig4):
    res = scan_resonances(fig4, np.array([2.5, 5.0, 30.0, 60.0]) * 1e-3)
    counts = [len(e.branches()) for e in res.entries]
    assert counts[0] == counts[1] == 3
    assert counts[2] > 3 and counts[3] >= counts[2]
    assert all(e.status == "ok" for e in res.entries)


def test_scan_symmetric_under_delta_sign_with_mirrored_trap(fig4_cfg):
    """delta -> -delta is the mirror image once the Ioffe field is reversed too
    (the field is an axial vector)."""
    maps = []
    for delta, axis in ((150.0, [0, 1, 0]), (-150.0, [0, -1, 0])):
        cfg = copy.deepcopy(fig4_cfg)
        cfg["rf"]["delta_deg"] = delta
        cfg["static"]["ioffe_axis"] = axis
        maps.append(scan_resonances(cfgmod.scenario_from(cfgmod.normalize(cfg)), [20e-3, 40e-3]))
    for a, b in zip(*(m.entries for m in maps)):
        assert [l.tag for l in a.lines] == [l.tag for l in b.lines]
        for x, y in zip(a.lines, b.lines):
            assert x.frequency == pytest.approx(y.frequency, abs=1e-6)
            assert x.weight == pytest.approx(y.weight, rel=1e-6)


def test_scan_validation_and_failures_as_status(fig4, monkeypatch):
    with pytest.raises(InvalidArgumentError):
        scan_resonances(fig4, [20e-3, 10e-3])
    with pytest.raises(InvalidArgumentError):
        scan_resonances(fig4, [20e-3], window=(5.0, 1.0))
    real = spmod.trap_point

    def flaky(sc, model="full", *a, **kw):
        if model == "full" and abs(sc.fields.rf_wires[0].current - 10e-3) < 1e-12:
            raise TopologyError("synthetic failure", count=0)
        return real(sc, model, *a, **kw)

    monkeypatch.setattr(spmod, "trap_point", flaky)
    res = scan_resonances(fig4, [5e-3, 10e-3])
    assert [e.status for e in res.entries] == ["ok", "TopologyError"]
    assert res.entries[1].lines == []
