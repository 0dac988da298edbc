"""Bundled example systems and the checks attached to them."""

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import sympy

from .algebra import parse_coefficient_expression
from .blowup import mo_class_test, polar_components
from .branches import BranchError, assemble_curve, branches_for_weight, extract_cofactor, fuchs_index, q_polynomial
from .classify import AnalysisConfig, InputError, analyze, load_system
from .cofactor import integral_K, pv_xi
from .diagram import newton_diagram, qh_decompose
from .flow import _parallel_map, a1_closed_quadrature, eta1_estimate
from .report import report_data, validate_report


@dataclass
class CheckResult:
    entry: str
    label: str
    passed: bool
    detail: str
    seconds: float = 0.0


def corpus_names():
    root = resources.files("centerfocus") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def corpus_path(name):
    path = resources.files("centerfocus") / "corpus" / f"{name}.toml"
    if not path.is_file():
        raise InputError(f"no corpus entry named {name!r}; available: {', '.join(corpus_names())}")
    return str(path)


def load_entry(name):
    return load_system(corpus_path(name))


def evaluate_formula(text, params):
    """Numeric value of a closed-form expression in the system parameters (may be complex)."""
    symbols = {k: sympy.Symbol(k) for k in params}
    expr = sympy.sympify(text, locals=symbols)
    subs = {symbols[k]: sympy.Rational(str(Fraction(v))) for k, v in params.items()}
    return complex(sympy.N(expr.subs(subs), 30))


def invariant_curve(X, w, M=20):
    branches, problems = branches_for_weight(X, w, M)
    if problems or not branches:
        raise BranchError("; ".join(problems) or "no nonreal branches")
    curve = assemble_curve(branches, M, X=X)
    extract_cofactor(X, curve)
    return curve


def eta1_value(X, w=None):
    """eta1 in the chart of the last Newton edge (or ``w``)."""
    w = tuple(w or newton_diagram(X).weights[-1])
    ps = polar_components(X, w, override=True)
    if mo_class_test(ps).in_mo:
        return a1_closed_quadrature(ps), "a1 quadrature"
    est = eta1_estimate(ps, X)
    return est.value, f"numeric ({est.method}, status {est.status})"


def _bound(spec, check):
    params = dict(spec.params)
    params.update({k: str(v) for k, v in (check.get("params") or {}).items()})
    return params


def _label(check):
    extra = check.get("params")
    tag = ", ".join(f"{k}={v}" for k, v in extra.items()) if extra else ""
    return check["kind"] + (f" [{tag}]" if tag else "")


def run_check(spec, check):
    kind = check["kind"]
    params = _bound(spec, check)
    X = spec.field(params)
    exact_params = {k: parse_coefficient_expression(v) for k, v in params.items()}
    if kind == "diagram":
        d = newton_diagram(X)
        got_w = [list(w) for w in d.weights]
        ok = got_w == check["weights"]
        detail = f"weights {got_w}"
        if "vertices" in check:
            got_v = [list(v) for v in d.vertices]
            ok = ok and got_v == check["vertices"]
            detail += f", vertices {got_v}"
        if "r" in check:
            got_r = [e.leading_degree for e in d.edges]
            ok = ok and got_r == check["r"]
            detail += f", r {got_r}"
        return ok, detail
    if kind == "q-polynomial":
        w = tuple(check["weights"])
        got = q_polynomial(qh_decompose(X, w).leading(), w).coeffs
        want = [parse_coefficient_expression(c, exact_params) for c in check["coeffs"]]
        while want and want[-1] == 0:
            want.pop()
        ok = len(got) == len(want)
        if ok:
            pivot = next(i for i, c in enumerate(want) if c != 0)
            ratio = Fraction(got[pivot]) / want[pivot] if want[pivot] else None
            ok = ratio is not None and ratio in (1, -1) and all(g == ratio * c for g, c in zip(got, want))
        return ok, f"got {[str(c) for c in got]}, expected {[str(c) for c in want]} up to sign"
    if kind == "fuchs":
        w = tuple(check["weights"])
        lead = qh_decompose(X, w).leading()
        Qp = q_polynomial(lead, w)
        want = evaluate_formula(check["formula"], params)
        got = [complex(fuchs_index(lead, w, Qp.gaussian_root(z) or z).j_star) for z in Qp.nonzero_roots()]
        err = min(abs(g - want) for g in got) if got else math.inf
        return err <= check.get("tol", 1e-10), f"indices {[f'{g:.12g}' for g in got]}, expected {want:.12g}"
    if kind == "eta1":
        value, method = eta1_value(X, check.get("weights"))
        want = evaluate_formula(check["formula"], params).real
        rel = abs(value / want - 1.0)
        return rel <= check.get("tol", 1e-3), f"eta1 = {value:.10g} by {method}; formula {want:.10g}; rel {rel:.2e}"
    if kind == "xi":
        ps = polar_components(X, tuple(check["weights"]), override=True)
        xi = pv_xi(ps)
        want = evaluate_formula(check["formula"], params).real
        return (xi.exists and abs(xi.value - want) <= check.get("tol", 1e-8),
                f"xi = {xi.value:.15g} (exists: {xi.exists}); expected {want:.15g}")
    if kind == "integral":
        w = tuple(check.get("weights") or newton_diagram(X).weights[-1])
        curve = invariant_curve(X, w)
        ps = polar_components(X, w, override=True)
        smp = integral_K(ps, X, curve.K, check["rho0"])
        want = evaluate_formula(check["formula"], params).real
        return abs(smp.value - want) <= check.get("tol", 1e-8), f"I = {smp.value:.12g}; expected {want:.12g}"
    if kind == "verdict":
        cfg = AnalysisConfig.from_mapping(spec.config)
        rep = analyze(spec, cfg, params=check.get("params"))
        validate_report(report_data(rep))
        v = rep.verdict
        ok = v.kind == check["expect"] and ("stability" not in check or v.stability == check["stability"])
        got = v.kind + (f"/{v.stability}" if v.stability else "")
        return ok, f"verdict {got} ({v.rule}); expected {check['expect']}" + (
            f"/{check['stability']}" if "stability" in check else "")
    raise InputError(f"unknown check kind {kind!r}")


def _run_one(spec, check):
    t0 = time.perf_counter()
    try:
        ok, detail = run_check(spec, check)
    except InputError:
        raise
    except Exception as exc:  # a crashing check is a failing check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(spec.name, _label(check), bool(ok), detail, time.perf_counter() - t0)


def run_corpus(name_filter=None):
    """Run every check of every matching corpus entry; also schema-validate the default report."""
    names = [n for n in corpus_names() if not name_filter or name_filter in n]
    if not names:
        raise InputError(f"no corpus entry matches {name_filter!r}")
    jobs = []
    for n in names:
        spec = load_entry(n)
        jobs.extend((spec, c) for c in spec.checks)
        jobs.append((spec, {"kind": "report"}))

    def job(item):
        spec, check = item
        if check["kind"] == "report":
            t0 = time.perf_counter()
            try:
                rep = analyze(spec)
                validate_report(report_data(rep))
                return CheckResult(spec.name, "report schema", True, f"verdict {rep.verdict.kind}",
                                   time.perf_counter() - t0)
            except Exception as exc:
                return CheckResult(spec.name, "report schema", False, f"{type(exc).__name__}: {exc}",
                                   time.perf_counter() - t0)
        return _run_one(spec, check)

    return _parallel_map(job, jobs)


def format_table(results):
    width = max((len(r.entry) for r in results), default=5)
    lw = max((len(r.label) for r in results), default=5)
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark}  {r.entry:<{width}}  {r.label:<{lw}}  {r.seconds:6.1f}s  {r.detail}")
    npass = sum(r.passed for r in results)
    lines.append(f"{npass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
