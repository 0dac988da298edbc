import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from centerfocus.classify import AnalysisConfig, InputError, analyze, load_system, system_from_mapping
from centerfocus.diagram import VectorField
from centerfocus.report import emit_report, report_data, validate_report
from centerfocus.suite import corpus_names, load_entry
from helpers import linear_focus

FAST = AnalysisConfig(rho0_grid=(1e-3, 5e-2, 6), bautin_order=2, pv_check=False)
slow_ok = settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
small = st.fractions(min_value=-3, max_value=3, max_denominator=4)


# ------------------------------------------------------------ configuration

def test_config_round_trip():
    cfg = AnalysisConfig.from_mapping({"weights": [1, 2], "rho0_grid": [1e-3, 1e-2, 4], "center_tol": 1e-7})
    again = AnalysisConfig.from_mapping(cfg.to_dict())
    assert again == cfg and cfg.weights == (1, 2)


@pytest.mark.parametrize("bad", [
    {"center_tol": 0}, {"weights": [2, 4]}, {"rho0_grid": [1e-2, 1e-3, 4]}, {"rho0_grid": [1e-3, 0.9, 4]},
    {"bautin_order": 0}, {"no_such_key": 1},
])
def test_config_rejects_bad_values(bad):
    with pytest.raises(InputError):
        AnalysisConfig.from_mapping(bad)


@given(st.floats(1e-6, 1e-2), st.floats(1.5, 40), st.integers(2, 12))
def test_grid_invariants(lo, ratio, n):
    hi = min(lo * ratio, 0.4)
    cfg = AnalysisConfig(rho0_grid=(lo, hi, n))
    g = cfg.grid
    assert len(g) == n and all(b < a for a, b in zip(g, g[1:]))
    assert g[0] <= cfg.trust_radius


# ------------------------------------------------------------ system files

def test_load_errors(tmp_path):
    with pytest.raises(InputError):
        load_system(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[system\n")
    with pytest.raises(InputError):
        load_system(bad)
    with pytest.raises(InputError):
        system_from_mapping({"system": {"P": [[1, 0]], "Q": []}})
    spec = system_from_mapping({"system": {"P": [[0, 1, "1"]], "Q": [[1, 0, "c"]]}, "params": {"c": "-1"}})
    with pytest.raises(InputError):
        spec.field({"c": "1 +"})


def test_every_corpus_entry_loads():
    for name in corpus_names():
        spec = load_entry(name)
        assert spec.checks and spec.field() is not None


# ------------------------------------------------------------ verdicts

def test_degenerate_singularity():
    X = VectorField.from_terms([[1, 1, "1"]], [[2, 0, "1"]])
    assert analyze(X, FAST).verdict.kind == "degenerate"


def test_non_monodromic_by_invariant_axis():
    X = VectorField.from_terms([[1, 0, "1"]], [[0, 1, "-1"]])
    rep = analyze(X, FAST)
    assert rep.verdict.kind == "not-monodromic"
    assert any("axis" in r for r in rep.monodromy["reasons"])


@given(small)
@slow_ok
def test_linear_verdicts_follow_the_trace(lam):
    rep = analyze(linear_focus(str(lam)), FAST)
    if lam == 0:
        assert rep.verdict.kind == "center"
    else:
        assert rep.verdict.kind == "focus"
        assert rep.verdict.stability == ("unstable" if lam > 0 else "stable")


@given(st.tuples(small, small, small, small))
@slow_ok
def test_quasihomogeneous_reports_are_total(params):
    A, B, C, D = params
    spec = load_entry("quasihomogeneous")
    try:
        X = spec.field({"A": str(A), "B": str(B), "C": str(C), "D": str(D)})
    except InputError:
        return
    rep = analyze(X, FAST)
    data = report_data(rep)
    validate_report(data)
    kind = rep.verdict.kind
    if kind == "center":
        assert 3 * A + D == 0
    if kind == "focus" and B != 0 and C != 0:
        assert 3 * A + D != 0


@given(st.fractions(min_value=-1, max_value=1, max_denominator=5))
@slow_ok
def test_reports_are_byte_identical(lam):
    X = linear_focus(str(lam))
    a = emit_report(analyze(X, FAST))
    b = emit_report(analyze(X, FAST))
    assert a == b
    json.loads(a)


def test_thread_count_does_not_change_the_report(monkeypatch):
    X = load_entry("andreev")
    monkeypatch.setenv("CENTERFOCUS_THREADS", "1")
    a = emit_report(analyze(X, FAST))
    monkeypatch.setenv("CENTERFOCUS_THREADS", "4")
    b = emit_report(analyze(X, FAST))
    assert a == b


def test_andreev_report_contents():
    rep = analyze(load_entry("andreev"))
    assert rep.verdict.kind == "focus" and rep.verdict.stability == "unstable"
    assert rep.eta["values"][0] == pytest.approx(1.0, abs=1e-9)
    eta2 = rep.eta["values"][1]
    assert rep.beta["quadrature"][0] == pytest.approx(4 * eta2, rel=1e-8)
    assert rep.beta["coeffs"]["1"] == pytest.approx(4 * eta2, rel=1e-5)
    samples = [s for s in rep.integrals["samples"] if s["status"] == "completed"]
    assert len(samples) == 8 and all(s["discrepancy"] < 1e-6 for s in samples)
    text = emit_report(rep, "text").decode()
    assert "verdict: focus (unstable)" in text
