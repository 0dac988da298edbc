"""End-to-end center/focus analysis of one system.

The pipeline is diagram -> blow-up per edge weight -> invariant branches and
curve -> flow on the cylinder -> cofactor integrals, followed by a verdict
that only claims a center when both the cofactor integral and the return map
say so, and a focus when a sign-defined cofactor or a nonzero Lyapunov
quantity (with a consistent return-map sign) supports it.
"""

import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .algebra import ExpressionError, poly_gcd
from .blowup import BlowupError, mo_class_test, polar_components
from .branches import (BranchError, assemble_curve, branches_for_weight, branch_residual,
                       extract_cofactor, q_polynomial)
from .cofactor import (CofactorError, beta_fit, beta_quadrature, integral_K, log_identity_check,
                       pv_xi, sign_definite_test)
from .diagram import DiagramError, VectorField, axis_invariance, newton_diagram, qh_decompose
from .flow import (FlowConfig, FlowError, _parallel_map, a1_closed_quadrature, bautin_coefficients,
                   eta1_estimate, geometric_grid, integrate_turn)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

NUMERIC_ETA_LABEL = "numeric, no closed-form method implemented"


class InputError(ValueError):
    """Unreadable or inconsistent input (maps to CLI exit code 2)."""


class InvariantViolation(RuntimeError):
    """A report that breaks its own invariants (CLI exit code 3)."""


@dataclass
class AnalysisConfig:
    weights: object = "auto"
    rho0_grid: tuple = (1e-3, 1e-1, 8)
    center_tol: float = 1e-6
    identity_tol: float = 1e-8
    oracle_tol: float = 1e-6
    focus_tol: float = 1e-4
    rtol: float = 1e-10
    atol: float = 1e-12
    bautin_order: int = 3
    branch_order: int = 20
    trust_radius: float = 0.5
    pv_check: bool = True
    eta1: bool = True
    bautin: bool = True
    xi: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("center_tol", "identity_tol", "oracle_tol", "focus_tol", "rtol", "atol", "trust_radius"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not v > 0:
                raise InputError(f"config {name} must be positive, got {v!r}")
        if self.weights != "auto":
            w = tuple(self.weights)
            if len(w) != 2 or not all(isinstance(v, int) and v > 0 for v in w) or math.gcd(*w) != 1:
                raise InputError(f"weights must be 'auto' or two coprime positive integers, got {self.weights!r}")
            self.weights = w
        lo, hi, n = self.rho0_grid
        if not (0 < lo < hi < self.trust_radius) or int(n) != n or n < 2:
            raise InputError(f"rho0 grid must satisfy 0 < lo < hi < trust radius and n >= 2, got {self.rho0_grid!r}")
        self.rho0_grid = (float(lo), float(hi), int(n))
        if int(self.bautin_order) < 1 or int(self.branch_order) < 1:
            raise InputError("bautin_order and branch_order must be positive")

    @property
    def grid(self):
        """Sample radii, strictly decreasing."""
        return geometric_grid(*self.rho0_grid)

    @property
    def flow(self):
        return FlowConfig(rtol=self.rtol, atol=self.atol, trust_radius=self.trust_radius)

    def updated(self, **kw):
        data = asdict(self)
        data.update(kw)
        return AnalysisConfig(**data)

    @classmethod
    def from_mapping(cls, data, base=None):
        data = dict(data or {})
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        if "weights" in data and data["weights"] != "auto":
            data["weights"] = tuple(data["weights"])
        if "rho0_grid" in data:
            data["rho0_grid"] = tuple(data["rho0_grid"])
        return (base or cls()).updated(**data)

    def to_dict(self):
        d = asdict(self)
        d["weights"] = "auto" if self.weights == "auto" else list(self.weights)
        d["rho0_grid"] = list(self.rho0_grid)
        return d


@dataclass
class SystemSpec:
    name: str
    P: list
    Q: list
    params: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    description: str = ""
    path: str = None

    def field(self, params=None):
        bound = dict(self.params)
        bound.update(params or {})
        try:
            return VectorField.from_terms(self.P, self.Q, {k: str(v) for k, v in bound.items()}, self.name)
        except (ExpressionError, DiagramError, ValueError) as exc:
            raise InputError(f"{self.name or 'system'}: {exc}") from exc

    def echo(self, params=None):
        bound = dict(self.params)
        bound.update(params or {})
        return {"name": self.name, "P": [list(t) for t in self.P], "Q": [list(t) for t in self.Q],
                "params": {k: str(v) for k, v in sorted(bound.items())}}


def load_system(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such system file: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{path}: invalid TOML ({exc})") from exc
    return system_from_mapping(data, path)


def system_from_mapping(data, path=None):
    sysd = data.get("system")
    if not isinstance(sysd, dict) or "P" not in sysd or "Q" not in sysd:
        raise InputError(f"{path or 'input'}: a [system] table with P and Q is required")
    for key in ("P", "Q"):
        terms = sysd[key]
        if not isinstance(terms, list) or not all(isinstance(t, list) and len(t) == 3 for t in terms):
            raise InputError(f"{path or 'input'}: {key} must be a list of [i, j, \"coefficient\"]")
    name = sysd.get("name") or (os.path.splitext(os.path.basename(path))[0] if path else "system")
    params = {k: str(v) for k, v in (data.get("params") or {}).items()}
    return SystemSpec(name, sysd["P"], sysd["Q"], params, dict(data.get("config") or {}),
                      list(data.get("check") or []), sysd.get("description", ""), path)


# ----------------------------------------------------------------- report

@dataclass
class Verdict:
    kind: str
    stability: str = None
    rule: str = None
    evidence: list = field(default_factory=list)
    notes: list = field(default_factory=list)


@dataclass
class AnalysisReport:
    system: dict
    config: dict
    diagram: dict = None
    monodromy: dict = None
    weights: list = field(default_factory=list)
    flow: dict = None
    eta: dict = None
    integrals: dict = None
    beta: dict = None
    verdict: Verdict = None
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["schema"] = 1
        return d


def _complex_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _terms(poly):
    out = []
    for i, j, c in poly.to_triples():
        out.append([i, j, str(c) if isinstance(c, Fraction) else float(complex(c).real)])
    return out


# ----------------------------------------------------------------- analysis

def _weight_record(X, w, cfg):
    rec = {"weights": list(w), "r": None, "omega": [], "orientation": None, "mo_class": None,
           "q_polynomial": None, "branches": [], "branch_problems": [], "curve": None,
           "curve_error": None, "sign_test": None, "xi": None}
    try:
        ps = polar_components(X, w, override=True)
    except BlowupError as exc:
        rec["curve_error"] = str(exc)
        return rec, None, None
    rec["r"] = ps.r
    rec["orientation"] = ps.orientation
    rec["omega"] = [{"angle": rt.angle, "multiplicity": rt.multiplicity, "certified": rt.certified}
                    for rt in ps.omega or []]
    rec["mo_class"] = ps.omega is not None and mo_class_test(ps).in_mo
    dec = qh_decompose(X, w)
    Qp = q_polynomial(dec.leading(), w)
    real_roots = [] if Qp.degenerate else Qp.real_roots()
    rec["q_polynomial"] = {"coeffs": [str(c) for c in Qp.coeffs], "degenerate": Qp.degenerate,
                           "roots": [_complex_pair(z) for z in ([] if Qp.degenerate else Qp.roots())],
                           "real_nonzero_roots": real_roots}
    curve = None
    if not Qp.degenerate and not real_roots:
        branches, problems = branches_for_weight(X, w, cfg.branch_order, dec)
        rec["branch_problems"] = problems
        for b in branches:
            rec["branches"].append({
                "alpha0": _complex_pair(b.alpha0), "exact": b.exact, "admissibility": b.admissibility,
                "fuchs_index": _complex_pair(b.fuchs.j_star) if b.fuchs and b.fuchs.j_star is not None else None,
                "terminates": b.terminates(), "order": b.order,
                "residual": _branch_residual(X, w, b)})
        if branches and not problems:
            try:
                curve = assemble_curve(branches, cfg.branch_order, X=X)
                extract_cofactor(X, curve)
            except BranchError as exc:
                rec["curve_error"] = str(exc)
                curve = None
    if curve is not None:
        rec["curve"] = {"F": _terms(curve.F), "s": curve.s, "exact": curve.exact,
                        "valid_degree": curve.valid_degree, "K": _terms(curve.K), "r_bar": curve.r_bar,
                        "cofactor_residual": curve.cofactor_residual, "notes": list(curve.notes)}
        if not curve.K.is_zero():
            d = None if curve.exact else 2 * curve.r_bar
            sv = sign_definite_test(curve.K, w, d)
            rec["sign_test"] = {"verdict": sv.verdict, "note": sv.note, "degree_cutoff": d,
                                "witnesses": [list(t) for t in sv.witnesses],
                                "leading_kind": sv.leading.get("kind"), "leading_sign": sv.leading.get("sign")}
    if cfg.xi and ps.omega:
        try:
            xi = pv_xi(ps)
            rec["xi"] = {"value": xi.value, "exists": xi.exists, "exp": math.exp(xi.value) if xi.value < 700 else None}
        except (ValueError, ArithmeticError) as exc:
            rec["xi"] = {"value": None, "exists": False, "error": str(exc)}
    return rec, ps, curve


def _branch_residual(X, w, b):
    p, q = w
    res = branch_residual(X, w, b.coeffs, q + b.order + p)
    return max((abs(complex(c)) for c in res.values()), default=0.0)


def _curve_choice(curves):
    """Prefer exact curves, then the smallest cofactor residual."""
    usable = [(w, c) for w, c in curves if c is not None and c.K is not None]
    if not usable:
        return None, None
    usable.sort(key=lambda wc: (not wc[1].exact, wc[1].cofactor_residual or 0.0))
    return usable[0]


def _stability(expanding, orientation):
    """Expanding/contracting in increasing phi, translated to forward time."""
    if orientation == 0:
        return None
    return "unstable" if (expanding == (orientation > 0)) else "stable"


def analyze(system, config=None, params=None):
    """Run the full pipeline on a SystemSpec, a path, or a VectorField."""
    if isinstance(system, (str, os.PathLike)):
        system = load_system(system)
    if isinstance(system, VectorField):
        X = system
        echo = {"name": X.name, "P": _terms(X.P), "Q": _terms(X.Q),
                "params": {k: str(v) for k, v in sorted(X.params.items())}}
        file_cfg = {}
    else:
        X = system.field(params)
        echo = system.echo(params)
        file_cfg = system.config
    cfg = config if config is not None else AnalysisConfig.from_mapping(file_cfg)
    report = AnalysisReport(echo, cfg.to_dict())
    try:
        _run(X, cfg, report)
    except (FlowError, CofactorError, BranchError, BlowupError, ArithmeticError) as exc:
        report.errors.append(f"{type(exc).__name__}: {exc}")
        if report.verdict is None:
            report.verdict = Verdict("inconclusive", rule="analysis aborted", notes=[str(exc)])
    check_report(report)
    return report


def _run(X, cfg, report):
    g = poly_gcd(X.P, X.Q)
    if g.degree() > 0 and g.coeff(0, 0) == 0:
        report.verdict = Verdict("degenerate", rule="non-isolated singularity",
                                 evidence=[f"gcd(P, Q) = {g} vanishes at the origin"])
        return
    diagram = newton_diagram(X)
    report.diagram = {"vertices": [list(v) for v in diagram.vertices],
                      "edges": [{"start": list(e.start), "end": list(e.end), "weights": list(e.weights),
                                 "r": e.leading_degree} for e in diagram.edges],
                      "warnings": list(diagram.warnings)}
    weights = diagram.weights
    if cfg.weights != "auto" and cfg.weights not in weights:
        report.warnings.append(f"weights {cfg.weights} are not Newton edge weights; analysed anyway")
        weights = weights + [cfg.weights]

    systems, curves = {}, []
    for w in weights:
        rec, ps, curve = _weight_record(X, w, cfg)
        report.weights.append(rec)
        systems[w] = ps
        curves.append((w, curve))

    reasons = []
    axes = axis_invariance(X)
    for axis, inv in sorted(axes.items()):
        if inv:
            reasons.append(f"axis {axis} is invariant")
    for rec in report.weights:
        roots = (rec["q_polynomial"] or {}).get("real_nonzero_roots") or []
        if roots:
            reasons.append(f"determining polynomial for weights {tuple(rec['weights'])} has real roots "
                           f"{[round(v, 12) for v in roots]}: real invariant branches reach the origin")
    report.monodromy = {"violated": bool(reasons), "reasons": reasons}
    if reasons:
        report.verdict = Verdict("not-monodromic", rule="monodromy condition violated", evidence=reasons)
        return

    flow_w = cfg.weights if cfg.weights != "auto" else weights[-1]
    ps = systems.get(flow_w)
    if ps is None or ps.orientation == "degenerate":
        report.verdict = Verdict("inconclusive", rule="no usable blow-up",
                                 notes=[f"leading angular component degenerate for weights {flow_w}"])
        return
    fcfg = cfg.flow
    mo = mo_class_test(ps).in_mo

    def turn(r0):
        return integrate_turn(ps, X, r0, direction=1, config=fcfg)

    grid = cfg.grid
    trajs = _parallel_map(turn, grid)
    orientation = next((t.orientation for t in trajs if t.completed), ps.orientation_sign)
    report.flow = {"weights": list(flow_w), "orientation": ps.orientation, "winding": orientation,
                   "mo_class": mo,
                   "poincare": [{"rho0": t.rho0, "rho1": t.rho_end, "status": t.status,
                                 "difference": (t.rho_end - t.rho0) if t.completed else None,
                                 "crossings": len(t.crossings)} for t in trajs]}

    eta = _eta_block(X, ps, cfg, mo, report)
    report.eta = eta
    w_curve, curve = _curve_choice(curves)
    report.integrals = _integral_block(X, ps, curve, w_curve, cfg, fcfg, grid)
    if mo and curve is not None and cfg.bautin and eta.get("bautin_ok"):
        report.beta = _beta_block(ps, curve, report.integrals, cfg, eta)
    eta.pop("bautin_ok", None)
    eta.pop("_bautin", None)
    report.verdict = _verdict(report, cfg, orientation, mo)


def _eta_block(X, ps, cfg, mo, report):
    out = {"values": [], "method": None, "error": None, "status": None, "bautin_ok": False}
    if mo:
        try:
            k = max(1, cfg.bautin_order)
            eta1 = a1_closed_quadrature(ps)
            out.update(method="a1 quadrature and Bautin recursion (analytic return map)", status="ok")
            if cfg.bautin:
                bc = bautin_coefficients(ps, k, rtol=min(cfg.rtol, 1e-12), atol=min(cfg.atol, 1e-14))
                out["values"] = [eta1] + list(bc.eta[1:])
                out["bautin_ok"] = True
                out["_bautin"] = bc
            else:
                out["values"] = [eta1]
            return out
        except FlowError as exc:
            report.warnings.append(f"Bautin recursion failed: {exc}")
    if not cfg.eta1:
        return out
    try:
        est = eta1_estimate(ps, X)
        out.update(values=[est.value], error=est.error, status=est.status,
                   method=f"{NUMERIC_ETA_LABEL} ({est.method})",
                   direction=est.direction, smallest_rho0=min(s.rho0 for s in est.samples))
    except FlowError as exc:
        out.update(status="failed", method=NUMERIC_ETA_LABEL)
        report.warnings.append(f"eta1 estimate failed: {exc}")
    return out


def _integral_block(X, ps, curve, w_curve, cfg, fcfg, grid):
    if curve is None:
        return None
    K = curve.K

    def one(r0):
        try:
            smp = integral_K(ps, X, K, r0, config=fcfg)
        except FlowError as exc:
            return {"rho0": r0, "value": None, "status": str(exc).split(": ")[-1].split(" ")[0],
                    "method": "time-domain", "oracle": None, "discrepancy": None, "flagged": None}
        try:
            log_identity_check(ps, X, curve, r0, sample=smp)
            smp.flagged = smp.discrepancy > cfg.oracle_tol
        except CofactorError as exc:
            smp.flagged = True
            smp.notes.append(str(exc))
        return {"rho0": r0, "value": smp.value, "status": "completed", "method": smp.method,
                "rho1": smp.rho1, "oracle": smp.oracle, "discrepancy": smp.discrepancy,
                "flagged": smp.flagged, "_traj": smp.trajectory}

    samples = _parallel_map(one, grid)
    block = {"curve_weights": list(w_curve), "chart_weights": list(ps.weights),
             "r_bar": K.min_weighted_degree(*ps.weights) if not K.is_zero() else None,
             "samples": samples, "pv": None}
    done = [s for s in samples if s["status"] == "completed"]
    if cfg.pv_check and done and ps.orientation != "mixed":
        s0 = done[len(done) // 2]
        try:
            pv = integral_K(ps, X, K, s0["rho0"], method="pv-phi-domain", config=fcfg, trajectory=s0["_traj"])
            block["pv"] = {"rho0": s0["rho0"], "value": pv.value, "time_domain": s0["value"],
                           "difference": abs(pv.value - s0["value"]), "notes": list(pv.notes)}
        except (CofactorError, FlowError, ValueError) as exc:
            block["pv"] = {"rho0": s0["rho0"], "value": None, "error": str(exc)}
    for s in samples:
        s.pop("_traj", None)
    return block


def _beta_block(ps, curve, integrals, cfg, eta):
    from .cofactor import CofactorIntegralSample
    bc = eta["_bautin"]
    K = curve.K
    if K.is_zero():
        return {"start": None, "coeffs": {}, "residual": 0.0, "quadrature": [0.0, 0.0]}
    start = K.min_weighted_degree(*ps.weights) - ps.r
    good = [CofactorIntegralSample(s["rho0"], s["value"], s["method"]) for s in integrals["samples"]
            if s["status"] == "completed" and not s["flagged"]]
    out = {"start": start, "coeffs": None, "residual": None, "quadrature": None}
    if len(good) >= 6:
        try:
            fit = beta_fit(good, start, k=3)
            out["coeffs"] = {str(i): v for i, v in sorted(fit.coeffs.items())}
            out["residual"] = fit.residual
        except CofactorError as exc:
            out["fit_error"] = str(exc)
    if bc.order >= 2:
        try:
            b0, b1 = beta_quadrature(ps, K, lambda t: bc.a(1, t), lambda t: bc.a(2, t))
            out["quadrature"] = [b0, b1]
        except CofactorError as exc:
            out["quadrature_error"] = str(exc)
    return out


def _verdict(report, cfg, orientation, mo):
    evidence_center, evidence_focus, notes = [], [], []
    stab = set()
    pts = report.flow["poincare"]
    done = [p for p in pts if p["status"] == "completed"]
    collapsed = [p for p in pts if p["status"] == "collapsed"]
    if collapsed:
        notes.append(f"{len(collapsed)} orbit(s) collapse towards the origin before a full turn")

    integ = report.integrals
    good = []
    if integ is not None:
        good = [s for s in integ["samples"] if s["status"] == "completed" and not s["flagged"]]
        flagged = [s for s in integ["samples"] if s["flagged"]]
        if flagged:
            notes.append(f"{len(flagged)} integral sample(s) disagree with the log identity oracle")
    enough = max(2, (len(pts) + 1) // 2)

    # center: vanishing cofactor integral and return-map identity, both on the grid
    if len(good) >= enough and all(abs(s["value"]) < cfg.center_tol for s in good):
        if len(done) >= enough and all(abs(p["difference"]) < cfg.identity_tol for p in done):
            evidence_center.append(f"cofactor integral: max |I(rho0)| = {max(abs(s['value']) for s in good):.3g} "
                                   f"over {len(good)} samples")
            evidence_center.append(f"return map: max |Pi(rho0) - rho0| = "
                                   f"{max(abs(p['difference']) for p in done):.3g} over {len(done)} samples")

    # focus from a sign-defined cofactor
    for rec in report.weights:
        st = rec.get("sign_test")
        if st and st["verdict"] in ("positive-definite", "negative-definite", "sign-defined"):
            sign = st["leading_sign"]
            evidence_focus.append(("sign test", f"cofactor {st['verdict']} for weights {tuple(rec['weights'])} "
                                   f"({st['note']})"))
            stab.add("unstable" if sign > 0 else "stable")
            break

    # focus from Lyapunov quantities with a consistent return-map sign
    eta = report.eta or {}
    vals = eta.get("values") or []
    diffs = [p["difference"] for p in done]
    lead = None
    if vals and vals[0] is not None and math.isfinite(vals[0]):
        if abs(vals[0] - 1.0) > cfg.focus_tol and (eta.get("error") is None or eta["error"] < abs(vals[0] - 1.0)):
            lead = (1, vals[0] - 1.0)
        elif mo and abs(vals[0] - 1.0) <= cfg.focus_tol:
            for i, v in enumerate(vals[1:], start=2):
                if abs(v) > cfg.focus_tol:
                    lead = (i, v)
                    break
    if lead is not None and eta.get("status") == "ok":
        i, v = lead
        expanding = v > 0
        # an escaped orbit expanded, a collapsed one contracted
        votes = [(d > 0, abs(d) >= cfg.identity_tol) for d in diffs]
        votes += [(True, True) for p in pts if p["status"] == "escaped"]
        votes += [(False, True) for p in pts if p["status"] == "collapsed"]
        consistent = len(votes) >= enough and all(e == expanding and big for e, big in votes)
        if consistent:
            label = "eta1 - 1" if i == 1 else f"eta{i}"
            evidence_focus.append(("Lyapunov quantity", f"{label} = {v:.6g}; return map moves all {len(votes)} "
                                   f"sampled orbits the same way ({len(diffs)} completed turns)"))
            stab.add(_stability(expanding, orientation))
        else:
            notes.append("Lyapunov quantity is nonzero but the return-map differences do not share its sign")

    # focus from the cofactor integral itself
    if len(good) >= enough and all(abs(s["value"]) > cfg.focus_tol for s in good):
        signs = {s["value"] > 0 for s in good}
        if len(signs) == 1:
            expanding = signs.pop()
            evidence_focus.append(("cofactor integral", f"I(rho0) of one sign with |I| > {cfg.focus_tol:g} "
                                   f"over {len(good)} samples"))
            stab.add(_stability(expanding, orientation))

    if evidence_center and evidence_focus:
        return Verdict("inconclusive", rule="conflicting evidence",
                       evidence=evidence_center + [e for _, e in evidence_focus], notes=notes)
    if evidence_center:
        return Verdict("center", rule="cofactor integral vanishes and return map is the identity",
                       evidence=evidence_center, notes=notes)
    if evidence_focus:
        stab.discard(None)
        if len(stab) > 1:
            return Verdict("inconclusive", rule="focus evidence with conflicting stability",
                           evidence=[e for _, e in evidence_focus], notes=notes)
        rule = {"sign test": "sign-defined cofactor",
                "Lyapunov quantity": "nonzero Lyapunov quantity",
                "cofactor integral": "nonzero cofactor integral"}[evidence_focus[0][0]]
        return Verdict("focus", stab.pop() if stab else None, rule, [e for _, e in evidence_focus], notes)
    return Verdict("inconclusive", rule="insufficient evidence", notes=notes)


def check_report(report):
    """Structural invariants of a finished report."""
    v = report.verdict
    if v is None:
        raise InvariantViolation("report has no verdict")
    if v.kind == "center" and len(v.evidence) < 2:
        raise InvariantViolation("center verdict needs two evidence sources")
    if v.kind == "focus" and not v.evidence:
        raise InvariantViolation("focus verdict without evidence")
    if v.kind not in ("center", "focus", "inconclusive", "not-monodromic", "degenerate"):
        raise InvariantViolation(f"unknown verdict {v.kind!r}")
