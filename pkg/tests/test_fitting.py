import numpy as np
import pytest

from floquet_dress import fitting
from floquet_dress.errors import DegenerateFitError, InvalidArgumentError
from floquet_dress.fitting import (Observation, ResonanceDataset, ResonanceModel, evaluate, fit_model, read_dataset,
                                   synthesize_dataset, write_dataset)

CURRENTS = [5e-3, 10e-3, 20e-3]


@pytest.fixture(scope="module")
def truth(fig4):
    return synthesize_dataset(fig4, CURRENTS, "rwa", {"scale": 1.15})


@pytest.mark.parametrize("start", [0.85, 1.3])
def test_round_trip_recovers_scale(fig4, truth, start):
    res = fit_model(truth, fig4, "rwa", {"scale": start * 1.15})
    assert res.converged
    assert res.params["scale"] == pytest.approx(1.15, rel=1e-6)
    assert res.rss <= 1e-12
    assert res.flagged == []
    assert np.all(np.diff(res.rss_history) < 0)


def test_two_scales_only_fix_the_combined_drive(fig4):
    """With delta = 180 deg the trapped lines depend on the wire currents
    through the combined drive only, so a per-wire fit reproduces the data on
    a whole family of (scale_A, scale_B) sharing roughly the same sum."""
    data = synthesize_dataset(fig4, CURRENTS, "rwa", {"scale_A": 1.1, "scale_B": 0.95})
    res = fit_model(data, fig4, "rwa", {"scale_A": 1.0, "scale_B": 1.0})
    assert res.converged and res.rss <= 1e-6
    assert res.params["scale_A"] + res.params["scale_B"] == pytest.approx(2.05, rel=1e-2)


def test_single_datum_is_fitted_exactly(fig4, truth):
    one = ResonanceDataset(truth.rows[:1])
    res = fit_model(one, fig4, "rwa", {"scale": 1.0})
    assert res.params["scale"] == pytest.approx(1.15, rel=1e-6)
    assert abs(res.residuals[0]) < 1e-3


def test_uniform_sigma_rescaling_leaves_estimate(fig4, truth):
    rows = list(truth.rows)
    rows[0] = Observation(rows[0].current, rows[0].frequency + 2e3, rows[0].sigma, rows[0].branch)
    noisy = ResonanceDataset(tuple(rows))
    a = fit_model(noisy, fig4, "rwa", {"scale": 1.0})
    b = fit_model(noisy.scaled_sigma(7.0), fig4, "rwa", {"scale": 1.0})
    assert a.params["scale"] == pytest.approx(b.params["scale"], rel=1e-7)
    assert b.rss == pytest.approx(a.rss / 49.0, rel=1e-6)


def test_residual_sign_is_model_minus_observed(fig4, truth):
    rows = tuple(Observation(o.current, o.frequency - 500.0, o.sigma, o.branch) for o in truth.rows)
    r, tags = evaluate(ResonanceModel(fig4, "rwa"), {"scale": 1.15}, ResonanceDataset(rows))
    assert np.allclose(r, 500.0, atol=1e-6)
    assert tags == [o.branch for o in truth.rows]


def test_parameter_without_effect_is_degenerate(fig4, truth, monkeypatch):
    # scale_B made inert: its Jacobian column vanishes
    monkeypatch.setattr(fitting, "_currents_for", lambda p, I: (p.get("scale_A", 1.0) * I, p.get("scale_A", 1.0) * I))
    with pytest.raises(DegenerateFitError):
        fit_model(truth, fig4, "rwa", {"scale_A": 1.0, "scale_B": 1.0})


def test_argument_errors(fig4, truth):
    with pytest.raises(InvalidArgumentError):
        fit_model(ResonanceDataset(truth.rows[:1]), fig4, "rwa", {"scale_A": 1.0, "scale_B": 1.0})
    with pytest.raises(InvalidArgumentError):
        fit_model(truth, fig4, "rwa", {"scale": 1.0, "scale_A": 1.0})
    with pytest.raises(InvalidArgumentError):
        fit_model(truth, fig4, "rwa", {"offset": 1.0})
    with pytest.raises(InvalidArgumentError):
        fit_model(truth, fig4, "exact", {"scale": 1.0})
    with pytest.raises(InvalidArgumentError):
        Observation(1e-3, 1e5, 0.0)


def test_csv_round_trip(truth):
    text = write_dataset(truth, comments=["synthetic"])
    assert text.startswith("# synthetic\nI_RF_mA,nu_kHz,sigma_kHz,branch\n")
    back = read_dataset(text)
    assert len(back) == len(truth)
    for a, b in zip(back.rows, truth.rows):
        assert a.branch == b.branch
        assert a.current == pytest.approx(b.current, rel=1e-11)
        assert a.frequency == pytest.approx(b.frequency, rel=1e-11)


def test_csv_branch_column_optional():
    d = read_dataset("I_RF_mA,nu_kHz,sigma_kHz\n10,650,2\n")
    assert d.rows[0] == Observation(10e-3, 650e3, 2e3, "")


@pytest.mark.parametrize("text, where", [
    ("", "row 1"),
    ("I_RF_mA,nu_kHz\n1,2\n", "row 1: missing column(s) sigma_kHz"),
    ("I_RF_mA,nu_kHz,sigma_kHz\n1,2,3\n4,abc,1\n", "row 3, column nu_kHz"),
    ("I_RF_mA,nu_kHz,sigma_kHz\n1,2\n", "row 2: expected 3 fields"),
    ("I_RF_mA,nu_kHz,sigma_kHz\nnan,2,1\n", "row 2, column I_RF_mA"),
    ("I_RF_mA,nu_kHz,sigma_kHz\n1,2,0\n", "row 2, column sigma_kHz"),
    ("I_RF_mA,nu_kHz,sigma_kHz\n1,-2,1\n", "row 2, column nu_kHz"),
])
def test_csv_errors_name_row_and_column(text, where):
    with pytest.raises(InvalidArgumentError, match=where.replace("(", r"\(").replace(")", r"\)")):
        read_dataset(text)
