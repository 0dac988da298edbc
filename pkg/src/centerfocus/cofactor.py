"""Cofactor integrals on the blown-up cylinder.

For an invariant curve F = 0 with cofactor K, the transformed cofactor

    Khat(phi, rho) = D(phi) K(rho^p cos phi, rho^q sin phi) / (rho^r Theta)

integrates along one turn to log|F(0, Pi(rho0)) / F(0, rho0)|, which is zero
exactly for centers.  Two routes are provided: a time-domain route that
accumulates the regular integrand D K / rho^r next to the flow, and a
phi-domain route that integrates Khat in the polar angle with symmetric
excision around the turning points of the trajectory.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.optimize import brentq

from .algebra import BiPoly, circle_roots, trig_substitute
from .blowup import CofactorEvaluator, mo_class_test
from .flow import TWO_PI, FlowConfig, FlowError, geometric_grid, integrate_turn

PV_EPS0 = 1e-2
PV_LEVELS = 9


class CofactorError(ValueError):
    pass


def _graded(K, w):
    p, q = w
    out = {}
    for (i, j), c in K.terms.items():
        out.setdefault(p * i + q * j, {})[(i, j)] = c
    return {d: BiPoly(t) for d, t in sorted(out.items())}


def khat(ps, K, phi, rho):
    """D(phi) K(rho^p cos, rho^q sin) / (rho^r Theta(phi, rho))."""
    _, theta = ps.evaluator().scalar(phi, rho)
    if theta == 0.0:
        raise CofactorError(f"Theta vanishes at phi = {phi}, rho = {rho}; use the PV or time-domain route")
    return CofactorEvaluator(K, ps.weights, ps.r).scalar(phi, rho) / theta


@dataclass
class CofactorIntegralSample:
    rho0: float
    value: float
    method: str
    rho1: float = None
    oracle: float = None
    discrepancy: float = None
    flagged: bool = False
    trajectory: object = field(default=None, repr=False)
    notes: list = field(default_factory=list)


def _axis_value(F, w, rho):
    p, _ = w
    return complex(F(rho ** p, 0.0)).real


def integral_K(ps, X, K, rho0, method="time-domain", config=None, trajectory=None):
    """Integral of Khat over one turn in increasing phi."""
    cfg = config or FlowConfig()
    if method == "time-domain":
        traj = integrate_turn(ps, X, rho0, direction=1, K=K, config=cfg)
        if not traj.completed:
            raise FlowError(f"turn from rho0 = {rho0} did not complete: {traj.status} ({traj.message})")
        return CofactorIntegralSample(rho0, traj.integral, method, traj.rho_end, trajectory=traj)
    if method == "pv-phi-domain":
        if ps.orientation == "mixed":
            raise CofactorError("phi-domain PV requires a definite orientation")
        traj = trajectory or integrate_turn(ps, X, rho0, direction=1, config=cfg)
        if not traj.completed:
            raise FlowError(f"turn from rho0 = {rho0} did not complete: {traj.status} ({traj.message})")
        value, notes = _pv_phi_integral(ps, K, traj, cfg)
        return CofactorIntegralSample(rho0, value, method, traj.rho_end, trajectory=traj, notes=notes)
    raise ValueError(f"unknown method {method!r}")


def _branches(traj):
    """Arc-length intervals on which phi is monotone, split at Theta = 0 crossings."""
    cuts = [c[0] for c in traj.crossings]
    edges = [0.0] + cuts + [traj.arc_length]
    out = []
    for k, (a, b) in enumerate(zip(edges, edges[1:])):
        if b <= a:
            continue
        out.append((a, b, k > 0, k < len(edges) - 2))
    return out


def _phi_at(traj, s):
    return traj.state(s)[0]


def _locate(traj, a, b, target):
    f = lambda s: _phi_at(traj, s) - target
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        return None
    return brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)


def _phi_ode_piece(ps, cof, phi_a, phi_b, rho_a, rtol):
    ev = ps.evaluator()

    def rhs(phi, u):
        rho = math.exp(u[0])
        rr, th = ev.scalar(phi, rho)
        return [rr / th, cof.scalar(phi, rho) / th]

    sol = solve_ivp(rhs, (phi_a, phi_b), [math.log(rho_a), 0.0], method="DOP853", rtol=rtol, atol=1e-14)
    if sol.status != 0:
        raise CofactorError(f"phi-domain integration failed: {sol.message}")
    return sol.y[1, -1]


def _excised_integral(ps, cof, traj, eps, rtol):
    total = 0.0
    for a, b, cut_start, cut_end in _branches(traj):
        phi_a, phi_b = _phi_at(traj, a), _phi_at(traj, b)
        sgn = 1.0 if phi_b > phi_a else -1.0
        start = phi_a + sgn * eps if cut_start else phi_a
        end = phi_b - sgn * eps if cut_end else phi_b
        if sgn * (end - start) <= 0:
            continue
        s_start = _locate(traj, a, b, start) if cut_start else a
        if s_start is None:
            continue
        rho_start = traj.state(s_start)[1]
        total += _phi_ode_piece(ps, cof, start, end, rho_start, rtol)
    return total


def _pv_phi_integral(ps, K, traj, cfg):
    cof = CofactorEvaluator(K, ps.weights, ps.r)
    notes = []
    for _, phi_c, rho_c, rr in traj.crossings:
        if abs(rr) < 1e-10:
            notes.append(f"tangential crossing near phi = {phi_c:.6g}, extrapolation unreliable")
    if not traj.crossings:
        return _phi_ode_piece(ps, cof, 0.0, TWO_PI, traj.rho0, cfg.rtol), notes
    eps = [PV_EPS0 * 2.0 ** -k for k in range(PV_LEVELS)]
    vals = [_excised_integral(ps, cof, traj, e, cfg.rtol) for e in eps]
    value = richardson_sqrt(eps, vals)
    notes.append(f"PV over {len(traj.crossings)} Theta crossings, eps {eps[0]:.3g}..{eps[-1]:.3g}")
    return value, notes


def richardson_sqrt(eps, vals, terms=4):
    """Extrapolate vals(eps) to eps -> 0 assuming an expansion in powers of sqrt(eps)."""
    e = np.sqrt(np.asarray(eps, dtype=float))
    A = np.vander(e, terms, increasing=True)
    coef, *_ = np.linalg.lstsq(A, np.asarray(vals, dtype=float), rcond=None)
    return float(coef[0])


def log_identity_check(ps, X, curve, rho0, config=None, sample=None):
    """|integral_K - log|F(0, Pi(rho0)) / F(0, rho0)||; fills the sample's oracle fields."""
    if curve.K is None:
        raise CofactorError("curve candidate has no cofactor")
    smp = sample or integral_K(ps, X, curve.K, rho0, config=config)
    f0 = _axis_value(curve.F, ps.weights, rho0)
    f1 = _axis_value(curve.F, ps.weights, smp.rho1)
    if f0 == 0.0 or f1 == 0.0:
        raise CofactorError("F vanishes on the section phi = 0: the curve has a real branch there")
    smp.oracle = math.log(abs(f1 / f0))
    smp.discrepancy = abs(smp.value - smp.oracle)
    return smp.discrepancy


def sample_integrals(ps, X, K, grid=None, method="time-domain", config=None, curve=None, oracle_tol=1e-6):
    from .flow import _parallel_map
    grid = grid or geometric_grid(1e-3, 1e-1, 8)

    def one(r0):
        smp = integral_K(ps, X, K, r0, method=method, config=config)
        if curve is not None:
            log_identity_check(ps, X, curve, r0, sample=smp)
            smp.flagged = smp.discrepancy > oracle_tol
        return smp

    return _parallel_map(one, list(grid))


# ------------------------------------------------------------- beta expansion

@dataclass
class BetaExpansion:
    start: int
    coeffs: dict
    residual: float
    quadrature: dict = field(default_factory=dict)

    def beta(self, i):
        return self.coeffs.get(i, 0.0)


def beta_fit(samples, start, k=3):
    """Least squares I(rho0) = sum_{i=start}^{start+k} beta_i rho0^i."""
    if len(samples) < 6:
        raise CofactorError("beta_fit needs at least 6 samples")
    rho = np.array([smp.rho0 for smp in samples], dtype=float)
    val = np.array([smp.value for smp in samples], dtype=float)
    scale = float(rho.max())
    powers = list(range(start, start + k + 1))
    A = np.stack([(rho / scale) ** i for i in powers], axis=1)
    if np.linalg.cond(A) > 1e12:
        raise CofactorError("ill-conditioned beta fit; widen the rho0 grid or lower k")
    coef, *_ = np.linalg.lstsq(A, val, rcond=None)
    resid = float(np.sqrt(np.mean((val - A @ coef) ** 2)))
    return BetaExpansion(start, {i: float(c) / scale ** i for i, c in zip(powers, coef)}, resid)


def beta_quadrature(ps, K, a1, a2=None):
    """Leading pair (beta_{rbar-r}, beta_{rbar-r+1}) by quadrature.

    a1 and a2 are callables of phi (e.g. from bautin_coefficients).  The
    a2 coefficient is (rbar - r), the exponent produced by expanding
    rho^(rbar-r) = (a1 rho0 + a2 rho0^2 + ...)^(rbar-r).
    """
    if not mo_class_test(ps).in_mo:
        raise CofactorError("beta quadrature needs the monodromic class")
    comps = _graded(K, ps.weights)
    if not comps:
        return 0.0, 0.0
    rbar = min(comps)
    m = rbar - ps.r
    if m < 0:
        raise CofactorError(f"cofactor degree {rbar} below r = {ps.r}")
    Kr = trig_substitute(comps[rbar])
    Kr1 = trig_substitute(comps.get(rbar + 1, BiPoly()))
    Gr, Gr1 = ps.Gj(ps.r), ps.Gj(ps.r + 1)
    D = ps.D

    def f0(t):
        return float(D(t)) * a1(t) ** m * float(Kr(t)) / float(Gr(t))

    def f1(t):
        g, k = float(Gr(t)), float(Kr(t))
        first = m * a1(t) ** (m - 1) * a2(t) * k / g if (m and a2 is not None) else 0.0
        second = a1(t) ** (m + 1) * (float(Kr1(t)) * g - k * float(Gr1(t))) / g ** 2
        return float(D(t)) * (first + second)

    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    b0 = quad(f0, 0.0, TWO_PI, **opts)[0]
    b1 = quad(f1, 0.0, TWO_PI, **opts)[0]
    return b0, b1


# ------------------------------------------------------------- sign analysis

@dataclass
class SignVerdict:
    verdict: str
    witnesses: list = field(default_factory=list)
    leading: dict = field(default_factory=dict)
    note: str = ""

    @property
    def sign_defined(self):
        return self.verdict in ("positive-definite", "negative-definite", "sign-defined")

    @property
    def sign(self):
        return self.leading.get("sign", 0)


def _leading_analysis(Kr):
    f = trig_substitute(Kr)
    roots = circle_roots(f)
    if not roots:
        v = float(f(0.0))
        return {"kind": "definite", "sign": 1 if v > 0 else -1, "roots": []}
    angles = [rt.angle for rt in roots] + [roots[0].angle + TWO_PI]
    mids = [(a + b) / 2 for a, b in zip(angles, angles[1:])]
    vals = [float(f(t)) for t in mids]
    signs = {int(np.sign(v)) for v in vals if v != 0.0}
    rec = {"roots": [(rt.angle, rt.multiplicity) for rt in roots]}
    if len(signs) == 1:
        rec.update(kind="semidefinite", sign=signs.pop())
    else:
        rec.update(kind="indefinite", sign=0, witness_angles=(mids[int(np.argmax(vals))], mids[int(np.argmin(vals))]))
    return rec


def sign_definite_test(K, w, d=None, rho_max=0.1, n_phi=512, n_rho=32):
    """Heuristic sign analysis of the jet of K up to weighted degree d.

    Stage one is exact on the leading form K_rbar(cos, sin); stage two
    samples the jet in weighted polar coordinates.  Definite verdicts need
    both stages to agree and are never a proof.
    """
    p, q = w
    comps = _graded(K, w)
    if d is not None:
        comps = {k: v for k, v in comps.items() if k <= d}
    if not comps:
        return SignVerdict("inconclusive", note="cofactor vanishes up to the degree cutoff")
    rbar = min(comps)
    lead = _leading_analysis(comps[rbar])
    jet = BiPoly()
    for v in comps.values():
        jet = jet + v
    phi = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    rho = np.geomspace(rho_max * 1e-3, rho_max, n_rho)
    P, R = np.meshgrid(phi, rho)
    xs, ys = R ** p * np.cos(P), R ** q * np.sin(P)
    vals = np.real(np.asarray(jet(xs, ys), dtype=complex)) / R ** rbar
    scale = float(np.max(np.abs(vals))) or 1.0
    tol = 1e-12 * scale
    pos, neg = vals > tol, vals < -tol
    if pos.any() and neg.any():
        ip, ineg = np.unravel_index(np.argmax(vals), vals.shape), np.unravel_index(np.argmin(vals), vals.shape)
        wit = [(float(xs[ip]), float(ys[ip]), float(vals[ip] * R[ip] ** rbar)),
               (float(xs[ineg]), float(ys[ineg]), float(vals[ineg] * R[ineg] ** rbar))]
        if lead["kind"] == "indefinite":
            return SignVerdict("indefinite", wit, lead, "certified leading form")
        return SignVerdict("indefinite", wit, lead, "sampled jet")
    grid_sign = 1 if pos.any() else (-1 if neg.any() else 0)
    if lead["kind"] == "indefinite":
        return SignVerdict("inconclusive", [], lead, "leading form indefinite but sampled jet is not")
    if grid_sign != lead["sign"]:
        return SignVerdict("inconclusive", [], lead, "stages disagree")
    name = "positive-definite" if grid_sign > 0 else "negative-definite"
    if lead["kind"] == "definite":
        return SignVerdict(name, [], lead, "certified leading form")
    if (pos | neg).all():
        return SignVerdict(name, [], lead, "semidefinite leading form, sampled jet")
    return SignVerdict("sign-defined", [], lead, "sampled jet vanishes on part of the grid")


# ------------------------------------------------------------- xi

@dataclass
class XiResult:
    value: float
    exists: bool
    excised: list
    sequence: list = field(default_factory=list)


def pv_xi(ps, eps0=1e-2, levels=PV_LEVELS):
    """Principal value of the integral of F_r/G_r over [0, 2 pi]."""
    Fr, Gr = ps.Fj(ps.r), ps.Gj(ps.r)
    f = lambda t: float(Fr(t)) / float(Gr(t))
    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    omega = list(ps.omega or [])
    if not omega:
        return XiResult(quad(f, 0.0, TWO_PI, **opts)[0], True, [])
    centers = sorted({rt.angle % TWO_PI for rt in omega})
    # shift the window so that no excised angle sits on the boundary
    gaps = [(b - a, a) for a, b in zip(centers, centers[1:] + [centers[0] + TWO_PI])]
    width, left = max(gaps)
    lo = left + width / 2
    pts = sorted(((c - lo) % TWO_PI) + lo for c in centers)
    eps = [eps0 * 2.0 ** -k for k in range(levels)]
    vals = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for e in eps:
            total, a = 0.0, lo
            for c in pts:
                total += quad(f, a, c - e, **opts)[0]
                a = c + e
            total += quad(f, a, lo + TWO_PI, **opts)[0]
            vals.append(total)
    d = np.diff(vals)
    exists = bool(abs(d[-1]) <= 0.75 * abs(d[-2]) + 1e-12)
    e = np.asarray(eps)
    A = np.vander(e, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(A, np.asarray(vals), rcond=None)
    return XiResult(float(coef[0]), exists, centers, vals)
