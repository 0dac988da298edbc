"""Numerical flow on the blown-up cylinder.

Trajectories of rho' = R, phi' = Theta are integrated in the arc-length
parameter of the (phi, log rho) plane, so neither Theta = 0 nor small rho
makes the problem singular.  The angle is stored relative to a reference
angle (0, 2 pi, or the characteristic direction nearest ahead) so that the
thin passages close to characteristic directions keep full relative
precision.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .blowup import CofactorEvaluator, mo_class_test

TWO_PI = 2.0 * math.pi
# trial steps may overshoot far past the escape event; rho is clamped a
# little above the trust radius so high powers of rho stay finite
LOG_RHO_MARGIN = 1.0


@dataclass
class FlowConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    trust_radius: float = 0.5
    collapse_factor: float = 1e-300
    max_arc_factor: float = 40.0
    method: str = "DOP853"
    angle_atol: float = 1e-16


class FlowError(RuntimeError):
    pass


def worker_count():
    try:
        return max(1, int(os.environ.get("CENTERFOCUS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class Segment:
    solution: object
    s0: float
    s1: float
    ref: float


@dataclass
class Trajectory:
    rho0: float
    direction: int
    orientation: int
    status: str
    rho_end: float = None
    integral: float = None
    arc_length: float = 0.0
    segments: list = field(default_factory=list, repr=False)
    crossings: list = field(default_factory=list)
    message: str = ""

    @property
    def completed(self):
        return self.status == "completed"

    def state(self, s):
        """(phi, rho, integral) at arc length s (phi is the true polar angle)."""
        for seg in self.segments:
            if seg.s0 <= s <= seg.s1 or seg is self.segments[-1]:
                u = seg.solution(s)
                psi = u[0] + seg.ref
                return self.direction * psi, math.exp(u[1]), u[2]
        raise ValueError("arc length outside the trajectory")

    def sample(self, n=200):
        s = np.linspace(0.0, self.arc_length, n)
        return np.array([self.state(v) for v in s])


def reference_cos_sin(ref):
    """cos and sin of a reference angle, exact at multiples of pi/2."""
    k = round(ref / (math.pi / 2))
    if abs(ref - k * math.pi / 2) < 1e-12:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4]
    return math.cos(ref), math.sin(ref)


class _Rhs:
    """Normalized field in (psi - ref, log rho, I) with psi = direction * phi.

    cos and sin of the true angle are formed by angle addition from the
    small offset, so the offset keeps its relative precision.
    """

    def __init__(self, evaluator, cof, sigma, direction, log_cap):
        self.ev = evaluator
        self.log_cap = log_cap
        self.cof = cof
        self.sigma = sigma
        self.direction = direction
        self.set_ref(0.0)

    def set_ref(self, ref):
        self.ref = ref
        self.cr, self.sr = reference_cos_sin(ref)

    def cos_sin(self, delta):
        cd, sd = math.cos(delta), math.sin(delta)
        c = self.cr * cd - self.sr * sd
        s = self.sr * cd + self.cr * sd
        return c, self.direction * s

    def __call__(self, s_, u):
        c, s = self.cos_sin(u[0])
        rho = math.exp(min(u[1], self.log_cap))
        rr, th = self.ev.scalar_cs(c, s, rho)
        n = math.hypot(th, rr)
        if n == 0.0:
            return [0.0, 0.0, 0.0]
        k = self.cof.scalar_cs(c, s, rho) if self.cof is not None else 0.0
        sg = self.sigma
        # d psi = direction * d phi, d phi/ds = sigma * Theta / N
        return [self.direction * sg * th / n, sg * rr / n, sg * k / n]

    def theta(self, s_, u):
        c, s = self.cos_sin(u[0])
        return self.ev.scalar_cs(c, s, math.exp(min(u[1], self.log_cap)))[1]


def _reference_angles(ps, direction):
    refs = {0.0, TWO_PI}
    for root in ps.omega or []:
        a = (direction * root.angle) % TWO_PI
        if 1e-9 < a < TWO_PI - 1e-9:
            refs.add(a)
    return sorted(refs)


def _probe_orientation(ps, rho0, cfg):
    """Winding sign of the flow of X itself (used for mixed orientation)."""
    ev = ps.evaluator()
    log_max, log_min = math.log(cfg.trust_radius), math.log(rho0) + math.log(cfg.collapse_factor)
    log_cap = log_max + LOG_RHO_MARGIN

    def rhs(s, u):
        rr, th = ev.scalar(u[0], math.exp(min(u[1], log_cap)))
        n = math.hypot(th, rr) or 1.0
        return [th / n, rr / n]

    def up(s, u):
        return u[0] - TWO_PI

    def down(s, u):
        return u[0] + TWO_PI

    def out(s, u):
        return (u[1] - log_max) * (u[1] - log_min)

    up.terminal, up.direction = True, 1
    down.terminal, down.direction = True, -1
    out.terminal = True
    budget = cfg.max_arc_factor * (TWO_PI + abs(math.log(rho0)))
    sol = solve_ivp(rhs, (0.0, budget), [0.0, math.log(rho0)], method=cfg.method, rtol=1e-8, atol=1e-10,
                    events=[up, down, out])
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    raise FlowError("cannot determine winding direction: the orbit does not complete a turn")


def integrate_turn(ps, X=None, rho0=0.05, direction=1, K=None, config=None, turns=1, orientation=None):
    """One (or several) full turns of the polar angle starting at phi = 0.

    direction = +1 follows increasing phi (the return map Pi),
    direction = -1 decreasing phi (Pi^-1).  If K is given, the regular
    time-domain integrand D K / rho^r is accumulated alongside.
    """
    cfg = config or FlowConfig()
    if ps.orientation == "degenerate":
        raise FlowError("leading angular component vanishes identically")
    if not (0.0 < rho0 < cfg.trust_radius):
        raise FlowError(f"rho0 = {rho0} outside (0, trust radius {cfg.trust_radius})")
    o = orientation or ps.orientation_sign or _probe_orientation(ps, rho0, cfg)
    sigma = direction * o
    ev = ps.evaluator()
    cof = CofactorEvaluator(K, ps.weights, ps.r) if K is not None else None
    rhs = _Rhs(ev, cof, sigma, direction, math.log(cfg.trust_radius) + LOG_RHO_MARGIN)
    refs = _reference_angles(ps, direction)
    bounds = [(a + b) / 2 for a, b in zip(refs, refs[1:])]
    plan = []
    for t in range(turns):
        base = t * TWO_PI
        for i, ref in enumerate(refs):
            if t > 0 and i == 0:
                continue
            end = bounds[i] if i < len(bounds) else TWO_PI
            plan.append((base + ref, base + end))
    traj = Trajectory(rho0, direction, o, "completed")
    log_max = math.log(cfg.trust_radius)
    log_min = math.log(rho0) + math.log(cfg.collapse_factor)
    max_arc = cfg.max_arc_factor * (TWO_PI * turns + abs(math.log(rho0)))
    u = [0.0, math.log(rho0), 0.0]
    psi_abs = 0.0
    s = 0.0
    atol = [cfg.angle_atol, cfg.atol, cfg.atol]
    for ref, end in plan:
        rhs.set_ref(ref)
        u = [psi_abs - ref, u[1], u[2]]
        target = end - ref

        def hit(s_, v, target=target):
            return v[0] - target
        hit.terminal, hit.direction = True, 1

        def escape(s_, v):
            return v[1] - log_max
        escape.terminal, escape.direction = True, 1

        def collapse(s_, v):
            return v[1] - log_min
        collapse.terminal, collapse.direction = True, -1

        def crossing(s_, v):
            return rhs.theta(s_, v)
        sol = solve_ivp(rhs, (s, s + max_arc), u, method=cfg.method, rtol=cfg.rtol, atol=atol,
                        events=[hit, escape, collapse, crossing], dense_output=True)
        traj.segments.append(Segment(sol.sol, s, sol.t[-1], ref))
        for s_c, y_c in zip(sol.t_events[3], sol.y_events[3]):
            phi_c = direction * (y_c[0] + ref)
            rho_c = math.exp(y_c[1])
            rr, _ = ev.scalar(phi_c, rho_c)
            traj.crossings.append((float(s_c), phi_c, rho_c, rr))
        u = list(sol.y[:, -1])
        s = sol.t[-1]
        if sol.t_events[1].size:
            traj.status, traj.message = "escaped", f"rho exceeded trust radius {cfg.trust_radius}"
            break
        if sol.t_events[2].size:
            traj.status, traj.message = "collapsed", ("radius fell below the collapse floor: the orbit tends "
                                                      "to the singular point or dips extremely close to it")
            break
        if not sol.t_events[0].size:
            traj.status = "stalled"
            traj.message = sol.message if sol.status < 0 else "arc-length budget exhausted"
            break
        psi_abs = end
        u[0] = 0.0
    traj.arc_length = s
    if traj.completed:
        traj.rho_end = math.exp(u[1])
        traj.integral = u[2] if K is not None else None
    return traj


@dataclass
class PoincareSample:
    rho0: float
    rho1: float
    difference: float
    status: str
    direction: int = 1


def poincare_map(ps, X=None, rho0=0.05, direction=1, config=None):
    traj = integrate_turn(ps, X, rho0, direction=direction, config=config)
    if not traj.completed:
        return PoincareSample(rho0, None, None, traj.status, direction)
    return PoincareSample(rho0, traj.rho_end, traj.rho_end - rho0, "completed", direction)


def geometric_grid(lo, hi, n):
    return list(np.geomspace(hi, lo, n))


def _parallel_map(fn, items):
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def rho_exponent_step(ps):
    """gcd of the rho powers j - r present in the polar system."""
    g = 0
    for j in range(ps.r, ps.j_max + 1):
        if not ps.Fj(j).is_zero() or not ps.Gj(j).is_zero():
            g = math.gcd(g, j - ps.r)
    return g or 1


@dataclass
class Eta1Estimate:
    value: float
    error: float
    status: str
    direction: int
    samples: list
    basis_step: int
    method: str = "numeric extrapolation of Pi(rho0)/rho0"


ETA1_CONFIG = FlowConfig(rtol=1e-12, atol=1e-14)
MIN_AUTO_RHO0 = 1e-14


def _contracting_samples(ps, X, grid, cfg):
    probe = integrate_turn(ps, X, grid[0], direction=1, config=cfg)
    direction = 1
    if probe.status == "escaped" or (probe.completed and probe.rho_end > grid[0]):
        direction = -1
    return direction, _parallel_map(lambda r0: poincare_map(ps, X, r0, direction, cfg), grid)


def _aitken(values):
    """Aitken delta-squared on the last three terms of a sequence."""
    s0, s1, s2 = values[-3:]
    den = (s2 - s1) - (s1 - s0)
    if den == 0.0:
        return s2, abs(s2 - s1)
    est = s2 - (s2 - s1) ** 2 / den
    return est, abs(est - s2)


def eta1_estimate(ps, X=None, grid=None, config=None, max_degree=3, target_rel_error=1e-5):
    """Extrapolate Pi(rho0)/rho0 to rho0 -> 0.

    Turns are integrated in the contracting direction (Pi or Pi^-1) so the
    orbit never leaves the sampled radius.  Ratios are fitted by polynomials
    in rho0^g, g the gcd of the rho powers of the polar system.  Outside the
    monodromic class the correction is usually a fractional power of rho0,
    so an Aitken extrapolation along the (geometric) grid competes with the
    polynomial fit and the smaller error estimate wins.

    Without an explicit grid, the default grid is moved towards the origin
    (factor 1e-3 per step) while turns fail to complete or the relative
    error stays above ``target_rel_error``.
    """
    auto = grid is None
    grid = sorted(grid or geometric_grid(1e-3, 3e-2, 8))
    if len(grid) < 4:
        raise FlowError("eta1_estimate needs at least 4 samples")
    cfg = config or ETA1_CONFIG
    g = rho_exponent_step(ps)
    best = None
    while True:
        direction, samples = _contracting_samples(ps, X, grid, cfg)
        est = _extrapolate(samples, direction, g, max_degree)
        if best is None or (est.status == "ok" and (best.status != "ok" or est.error < best.error)):
            best = est
        done = est.status == "ok" and est.error <= target_rel_error * abs(est.value)
        if not auto or done or grid[0] < MIN_AUTO_RHO0:
            break
        # outside the monodromic class orbits make radial excursions near
        # characteristic directions and the ratio converges slowly
        grid = [r * 1e-3 for r in grid]
    return best


def _extrapolate(samples, direction, g, max_degree):
    good = [smp for smp in samples if smp.status == "completed"]
    if len(good) < len(samples) or len(good) < 4:
        return Eta1Estimate(float("nan"), float("inf"), "inconclusive", direction, samples, g)
    rho = np.array([smp.rho0 for smp in good])
    ratio = np.array([smp.rho1 / smp.rho0 for smp in good])
    x = rho ** g
    fits = []
    for deg in range(1, max_degree + 1):
        if len(x) < deg + 3:
            break
        A = np.vander(x, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(A, ratio, rcond=None)
        resid = ratio - A @ coef
        fits.append((float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))))
    value, rms = fits[-1]
    error = max(rms, abs(fits[-1][0] - fits[-2][0]) if len(fits) > 1 else rms)
    method = "polynomial fit in rho0^%d" % g
    ait, ait_err = _aitken(list(ratio[::-1]))
    if ait_err < error:
        value, error, method = ait, ait_err, "Aitken extrapolation"
    diffs = np.diff(ratio)
    noise = max(1e-4 * float(np.max(np.abs(ratio))), 3 * rms)
    status = "ok"
    if np.any(diffs > noise) and np.any(diffs < -noise):
        status = "inconclusive"
    if direction == -1:
        error = error / value ** 2
        value = 1.0 / value
    return Eta1Estimate(float(value), float(error), status, direction, samples, g, method)


# ---------------------------------------------------------------- Bautin

@dataclass
class BautinCoefficients:
    order: int
    solution: object = field(repr=False)
    eta: list = field(default_factory=list)

    def a(self, i, phi):
        """a_i(phi) on scalar or array phi."""
        return self.solution.sol(phi)[i - 1]

    def basis(self, ps, phi, k=None):
        return _expansion_basis(ps, phi, k or self.order)


def _expansion_basis(ps, phi, k):
    """F_1..F_k(phi) with R/Theta = sum F_i rho^i, via power-series division."""
    r = ps.r
    num = [float(ps.Fj(r + i)(phi)) for i in range(k)]
    den = [float(ps.Gj(r + i)(phi)) for i in range(k)]
    out = [0.0] * k
    for n in range(k):
        acc = num[n] - sum(out[m] * den[n - m] for m in range(n))
        out[n] = acc / den[0]
    return out


def _power_coeffs(a, m, k):
    """Coefficients [rho0^1..rho0^k] of (sum a_i rho0^i)^m."""
    base = [0.0] + list(a[:k])
    result = [1.0] + [0.0] * k
    for _ in range(m):
        new = [0.0] * (k + 1)
        for i, ri in enumerate(result):
            if ri == 0.0:
                continue
            for j in range(1, k + 1 - i):
                new[i + j] += ri * base[j]
        result = new
    return result[1:]


def bautin_coefficients(ps, k=3, rtol=1e-12, atol=1e-14):
    """a_i(phi) from a_n' = sum_m F_m [ (sum a_i rho0^i)^m ]_n, a_1(0) = 1."""
    if not mo_class_test(ps).in_mo:
        raise FlowError("Bautin recursion needs the monodromic class (no characteristic directions)")
    if ps.j_max < ps.r + k - 1:
        raise FlowError("not enough polar components for the requested order")

    def rhs(phi, a):
        basis = _expansion_basis(ps, phi, k)
        out = [0.0] * k
        for m in range(1, k + 1):
            pw = _power_coeffs(a, m, k)
            fm = basis[m - 1]
            for n in range(k):
                out[n] += fm * pw[n]
        return out

    a0 = [1.0] + [0.0] * (k - 1)
    sol = solve_ivp(rhs, (0.0, TWO_PI), a0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if sol.status != 0:
        raise FlowError(f"Bautin integration failed: {sol.message}")
    return BautinCoefficients(k, sol, [float(v) for v in sol.y[:, -1]])


def a1_closed_quadrature(ps):
    """exp of the integral of F_r/G_r over one turn."""
    if not mo_class_test(ps).in_mo:
        raise FlowError("closed a_1 quadrature needs the monodromic class")
    Fr, Gr = ps.Fj(ps.r), ps.Gj(ps.r)
    val, _ = quad(lambda t: float(Fr(t)) / float(Gr(t)), 0.0, TWO_PI, limit=400, epsabs=1e-14, epsrel=1e-13)
    return math.exp(val)
