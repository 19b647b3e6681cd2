"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one PASS/FAIL line (visible without -s).
"""

import time

import numpy as np
import pytest

from floquet_dress import checks, cli
from floquet_dress import config as cfgmod
from floquet_dress.constants import MA


@pytest.fixture
def report(capsys):
    def emit(number, result, seconds=None, budget=None):
        ok = result.passed and (budget is None or seconds <= budget)
        timing = "" if seconds is None else f" in {seconds:.1f} s" + (f" (budget {budget:g} s)" if budget else "")
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {result.name}: {result.detail}{timing}")
        assert result.passed, result.detail
        if budget is not None:
            assert seconds <= budget, f"took {seconds:.1f} s, budget {budget} s"
    return emit


def _timed(fn, *a, **kw):
    t = time.perf_counter()
    r = fn(*a, **kw)
    return r, time.perf_counter() - t


def test_criterion_1_oracle_equivalence(report):
    r, s = _timed(checks.check_oracle_equivalence, cases=200, seed=0)
    report(1, r, s, 120)


def test_criterion_2_rwa_equivalence(report):
    r, s = _timed(checks.check_rwa_equivalence, cases=200, seed=0)
    report(2, r, s, 30)


def test_criterion_3_rwa_scaling(report):
    r, s = _timed(checks.check_rwa_scaling)
    report(3, r, s, 60)


def test_criterion_4_bloch_siegert_two_level(report):
    r, s = _timed(checks.check_bloch_siegert_two_level)
    report(4, r, s, 30)


def test_criterion_5_scenario_potentials(report):
    r, s = _timed(checks.check_scenario_potentials)
    report(5, r, s, 60)


@pytest.fixture(scope="module")
def scenario_scan():
    scan, s = _timed(checks.scenario_scan)
    return scan, s


def test_criterion_6a_three_branches(report, scenario_scan):
    scan, s = scenario_scan
    assert scan.currents[0] == pytest.approx(2.5 * MA)
    report("6a", checks.check_three_branches(scan), s, 300)


def test_criterion_6b_strongest_order(report, scenario_scan):
    scan, s = scenario_scan
    report("6b", checks.check_strongest_order(scan, 60 * MA, 2), s, 300)


def test_criterion_6c_bloch_siegert_scan(report, scenario_scan):
    scan, s = scenario_scan
    report("6c", checks.check_bloch_siegert_scan(scan), s, 300)


def test_criterion_7_selection_rule(report):
    r, s = _timed(checks.check_selection_rule, cases=20, seed=0)
    report(7, r, s, 60)


def test_criterion_8_truncation(report):
    r, s = _timed(checks.check_truncation)
    report(8, r, s, 60)


def test_criterion_9_fit_falsification(report):
    r, s = _timed(checks.check_fit_falsification)
    report(9, r, s, 120)


def _outputs(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(report, tmp_path, capsys, monkeypatch, fig4):
    from floquet_dress.fitting import synthesize_dataset, write_dataset

    data = tmp_path / "data.csv"
    data.write_text(write_dataset(synthesize_dataset(fig4, [5e-3, 20e-3, 40e-3], "full")))
    monkeypatch.setenv(cli.SEED_ENV, "11")
    commands = [
        ["potential", "--config", "paper_fig1b"],
        ["levels", "--config", "paper_fig1b"],
        ["scan", "--config", "paper_fig4"],
        ["fit", "--config", "paper_fig4", "--data", str(data)],
        ["selftest", "--cases", "3", "--checks", "oracle,rwa,selection"],
    ]
    t = time.perf_counter()
    runs = {}
    for tag, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
        for cmd in commands:
            code = cli.main(cmd + ["--out", str(tmp_path / tag / cmd[0]), "--jobs", jobs])
            assert code == 0, (cmd, capsys.readouterr().err)
        capsys.readouterr()
        runs[tag] = _outputs(tmp_path / tag)
    seconds = time.perf_counter() - t
    names = sorted(runs["a"])
    differing = [n for n in names if not (runs["a"][n] == runs["b"].get(n) == runs["c"].get(n))]
    result = checks.CheckResult("determinism", len(names) == 6 and not differing,
                                f"{len(names)} output files, identical across reruns and --jobs 1/2"
                                if not differing else f"differing outputs: {differing}")
    report(10, result, seconds)
