"""Invariant branches y*(x) = sum alpha_m x^((q+m)/p), invariant curves and cofactors."""

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .algebra import BiPoly, GaussRational, TruncatedSeries, circle_roots, poly_divide, trig_substitute
from .algebra.gauss import is_exact

RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_TOL = 1e-10
TERMINATION_TOL = 1e-11
TERMINATION_RUN = 10
BRANCH_DIGITS = 40


class BranchError(ArithmeticError):
    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


# ---------------------------------------------------------------- polynomials

def _poly_eval(coeffs, z):
    total = 0
    for c in reversed(coeffs):
        total = total * z + c
    return total


def _poly_deriv(coeffs):
    return [c * k for k, c in enumerate(coeffs)][1:]


def _trim(coeffs):
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


@dataclass
class DeterminingPolynomial:
    coeffs: list
    provenance: str
    weights: tuple
    order: int
    degenerate: bool = False

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, eta):
        return _poly_eval(self.coeffs, eta)

    def monic_roots_equal(self, other_coeffs, tol=1e-12):
        a = np.sort_complex(np.roots([complex(c) for c in reversed(self.coeffs)]))
        b = np.sort_complex(np.roots([complex(c) for c in reversed(_trim(other_coeffs))]))
        return len(a) == len(b) and bool(np.all(np.abs(a - b) <= tol * max(1.0, np.max(np.abs(a), initial=0))))

    def roots(self):
        """Numerical roots, Newton-polished against the exact coefficients."""
        if self.degree < 1:
            return []
        raw = np.roots([complex(c) for c in reversed(self.coeffs)])
        fc = [complex(c) for c in self.coeffs]
        dc = _poly_deriv(fc)
        out = []
        for z in raw:
            z = complex(z)
            for _ in range(8):
                d = _poly_eval(dc, z)
                if d == 0:
                    break
                step = _poly_eval(fc, z) / d
                z -= step
                if abs(step) <= 1e-17 * max(1.0, abs(z)):
                    break
            out.append(z)
        return out

    def nonzero_roots(self, tol=1e-12):
        return [z for z in self.roots() if abs(z) > tol]

    def gaussian_root(self, z, max_den=10 ** 6):
        """Exact Gaussian-rational root close to z, or None."""
        cand = GaussRational(Fraction(z.real).limit_denominator(max_den),
                             Fraction(z.imag).limit_denominator(max_den))
        if _poly_eval([GaussRational.coerce(c) for c in self.coeffs], cand) == 0:
            return cand
        return None

    def multiplicity(self, z, tol=1e-8):
        m, coeffs = 0, [complex(c) for c in self.coeffs]
        while coeffs and abs(_poly_eval(coeffs, z)) <= tol * max(1.0, max(abs(c) for c in coeffs)):
            m += 1
            coeffs = _poly_deriv(coeffs)
        return m

    def real_roots(self, tol=1e-9):
        """Real nonzero roots: exact sign changes / rational root isolation."""
        import sympy
        eta = sympy.Symbol("eta")
        poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coeffs)], eta)
        out = []
        for root in poly.real_roots():
            v = float(root)
            if abs(v) > tol:
                out.append(v)
        return sorted(set(out))


def q_polynomial(Xr, w):
    """Q(eta) = (q/p) eta P_{p+r}(1, eta) - Q_{q+r}(1, eta)."""
    p, q = w
    P, Q = Xr
    pc, qc = P.eta_polynomial(), Q.eta_polynomial()
    n = max(len(pc) + 1, len(qc))
    coeffs = [Fraction(0)] * n
    for k, c in enumerate(pc):
        coeffs[k + 1] += Fraction(q, p) * c
    for k, c in enumerate(qc):
        coeffs[k] -= c
    coeffs = _trim(coeffs)
    r = None
    if not P.is_zero():
        r = P.weighted_degree(p, q) - p
    elif not Q.is_zero():
        r = Q.weighted_degree(p, q) - q
    return DeterminingPolynomial(coeffs, "from-field", (p, q), r, degenerate=not coeffs)


def p_polynomial_from_curve(F, w):
    """Determining polynomial of F for the Newton edge with weights (p,q).

    F(x^p, x^q eta) = x^s [F_s(1, eta) + O(x)] and F_s(1, eta) = eta^m1 P(eta).
    """
    p, q = w
    if F.is_zero():
        raise BranchError("curve is identically zero")
    if F.coeff(0, 0) != 0:
        raise BranchError("curve does not pass through the origin")
    s = F.min_weighted_degree(p, q)
    Fs = F.component(p, q, s)
    if len(Fs) < 2:
        raise BranchError(f"weights {w} do not define an edge of the Newton diagram of F")
    coeffs = Fs.eta_polynomial()
    m1 = 0
    while coeffs[m1] == 0:
        m1 += 1
    return DeterminingPolynomial(_trim(coeffs[m1:]), "from-curve", (p, q), s)


# ---------------------------------------------------------------- Fuchs index

@dataclass
class FuchsResult:
    j_star: complex
    slope: complex
    intercept: complex
    verdict: str
    rational: object = None
    heuristic: str = (f"rational iff continued fraction with denominator <= {RATIONAL_MAX_DENOMINATOR} "
                      f"matches within {RATIONAL_TOL}")

    def V(self, j):
        return self.slope * j + self.intercept


def _as_number(z, exact):
    return z if exact else complex(z)


def _leading_values(Xr, w, alpha0):
    P, Q = Xr
    Pe, Qe = P.eta_polynomial(), Q.eta_polynomial()
    exact = is_exact(alpha0)
    if not exact:
        Pe, Qe = [complex(c) for c in Pe], [complex(c) for c in Qe]
    return (_poly_eval(Pe, alpha0), _poly_eval(_poly_deriv(Pe), alpha0) if len(Pe) > 1 else 0,
            _poly_eval(Qe, alpha0), _poly_eval(_poly_deriv(Qe), alpha0) if len(Qe) > 1 else 0)


def fuchs_index(Xr, w, alpha0, tol=1e-12):
    """V(j) = P(1,a) j + (q/p)(a P_eta(1,a) + P(1,a)) - Q_eta(1,a) and its root."""
    p, q = w
    P1, dP1, _, dQ1 = _leading_values(Xr, w, alpha0)
    ratio = Fraction(q, p) if is_exact(alpha0) else q / p
    slope = P1
    intercept = ratio * (alpha0 * dP1 + P1) - dQ1
    scale = max(1.0, abs(complex(intercept)))
    if abs(complex(slope)) <= tol * scale:
        return FuchsResult(None, slope, intercept, "degenerate")
    j = complex(-intercept / slope)
    rational = None
    if abs(j.imag) <= RATIONAL_TOL * max(1.0, abs(j)):
        guess = Fraction(j.real).limit_denominator(RATIONAL_MAX_DENOMINATOR)
        if abs(guess - j.real) <= RATIONAL_TOL * max(1.0, abs(j.real)):
            rational = guess
    if rational is not None and rational > 0 and rational.denominator != 1:
        verdict = "general-theory-needed"
    else:
        verdict = "n=p"
    return FuchsResult(j, slope, intercept, verdict, rational)


# ---------------------------------------------------------------- branches

@dataclass
class Branch:
    alpha0: object
    weights: tuple
    n: int
    coeffs: list
    exact: bool
    admissibility: str
    fuchs: FuchsResult = None
    free_orders: list = field(default_factory=list)
    partner: int = None

    @property
    def order(self):
        return len(self.coeffs) - 1

    def last_nonzero(self, tol=TERMINATION_TOL):
        scale = abs(complex(self.alpha0))
        last = 0
        for m, c in enumerate(self.coeffs):
            if abs(complex(c)) > tol * scale:
                last = m
        return last

    def terminates(self):
        m = self.last_nonzero()
        return self.order - m >= TERMINATION_RUN

    def series(self, exact_if_terminating=False):
        """y*(t) as a TruncatedSeries in t = x^(1/p)."""
        p, q = self.weights
        if exact_if_terminating and self.terminates():
            last = self.last_nonzero()
            return TruncatedSeries({q + m: c for m, c in enumerate(self.coeffs[:last + 1])}, None, p)
        return TruncatedSeries({q + m: c for m, c in enumerate(self.coeffs)}, q + self.order + 1, p)

    def conjugate_coeffs(self):
        return [c.conjugate() if not isinstance(c, Fraction) else c for c in self.coeffs]


def _field_on_branch(X, y, p, bound):
    """P(x, y(t)) and Q(x, y(t)) with x = t^p, truncated below t^bound."""
    powers = [TruncatedSeries({0: Fraction(1)}, None, p)]
    jmax = max([j for _, j in X.P.terms] + [j for _, j in X.Q.terms] + [0])
    for _ in range(jmax):
        powers.append((powers[-1] * y).truncate(bound))

    def build(poly):
        out = TruncatedSeries({}, bound, p)
        for (i, j), c in poly.terms.items():
            if p * i >= bound:
                continue
            out = out + powers[j].shift(p * i).scale(c)
        return out.truncate(bound)

    return build(X.P), build(X.Q)


def branch_residual(X, w, coeffs, upto):
    """Coefficients of E = P y' - Q along y = sum coeffs[m] t^(q+m), exponents < upto."""
    p, q = w
    y = TruncatedSeries({q + m: c for m, c in enumerate(coeffs)}, None, p)
    bound = upto + p + abs(q - p) + 1
    Pt, Qt = _field_on_branch(X, y, p, bound)
    E = Pt * y.differentiate() - Qt
    return {e: c for e, c in E.coeffs.items() if e < upto}


def extend_branch(X, w, alpha0, M, decomposition=None, force=False, tol=1e-11):
    """Solve the branch coefficients order by order in t = x^(1/p).

    The coefficient of alpha_m at t^(q+r+m) in P y' - Q is V(m/p), so
    alpha_m = -c_m / V(m/p) where c_m is that coefficient with alpha_m = 0.
    """
    from .diagram import qh_decompose

    p, q = w
    dec = decomposition or qh_decompose(X, w)
    r = dec.r
    Xr = dec.leading()
    exact = is_exact(alpha0) and X.P.is_rational() and X.Q.is_rational()
    if alpha0 == 0:
        raise BranchError("leading coefficient alpha_0 must be nonzero")
    if exact:
        fuchs = fuchs_index(Xr, w, alpha0)
        V, Xwork = fuchs.V, X
    else:
        # rounding in alpha_0 is amplified geometrically by the recursion,
        # so inexact branches are carried in extended precision
        ctx = mpmath.MPContext()
        ctx.dps = BRANCH_DIGITS
        alpha0 = _polish_root(q_polynomial(Xr, w).coeffs, alpha0, ctx)
        fuchs = fuchs_index(Xr, w, complex(alpha0))
        Xwork = _mp_field(X, ctx)
        V = _mp_fuchs_line(Xr, w, alpha0, ctx)
    if fuchs.verdict == "general-theory-needed" and not force:
        raise BranchError(f"Fuchs index {fuchs.rational} lies in Q+ \\ N; branch index not determined")
    if fuchs.verdict == "degenerate" and not force:
        raise BranchError("Fuchs polynomial V(j) is constant; branch recursion degenerate")
    coeffs = [alpha0]
    lead = q + r
    c0 = branch_residual(Xwork, w, coeffs, lead + 1).get(lead, 0)
    if abs(complex(c0)) > 1e-9 * max(1.0, abs(complex(alpha0))):
        raise BranchError(f"alpha_0 = {alpha0} is not a root of the determining polynomial")
    free = []
    for m in range(1, M + 1):
        cm = branch_residual(Xwork, w, coeffs + [0], lead + m + 1).get(lead + m, 0)
        vm = V(Fraction(m, p))
        if abs(complex(vm)) <= tol * max(1.0, abs(complex(fuchs.slope))):
            if abs(complex(cm)) <= 1e-9 * max(1.0, abs(complex(alpha0))):
                coeffs.append(GaussRational(0) if exact else 0j)
                free.append(m)
                continue
            raise BranchError(f"resonant step at order {m}: V({m}/{p}) = 0 with nonzero residual", m)
        coeffs.append(-cm / vm)
    if not exact:
        coeffs = [complex(c) for c in coeffs]
    admissibility = "simple" if fuchs.verdict == "n=p" else "undetermined"
    return Branch(coeffs[0], (p, q), p, coeffs, exact, admissibility, fuchs, free)


def _mp_number(c, ctx):
    if isinstance(c, Fraction):
        return ctx.mpc(ctx.mpf(c.numerator) / c.denominator)
    if isinstance(c, GaussRational):
        return ctx.mpc(ctx.mpf(c.re.numerator) / c.re.denominator, ctx.mpf(c.im.numerator) / c.im.denominator)
    return ctx.mpc(c)


def _mp_field(X, ctx):
    from .diagram import VectorField
    conv = lambda c: _mp_number(c, ctx)
    return VectorField(X.P.map_coeffs(conv), X.Q.map_coeffs(conv), X.params, X.name)


def _polish_root(coeffs, z, ctx):
    """Newton refinement of a root of an exact polynomial at the context precision."""
    fc = [_mp_number(c, ctx) for c in coeffs]
    dc = _poly_deriv(fc)
    z = ctx.mpc(complex(z))
    eps = ctx.mpf(10) ** (-(ctx.dps - 5))
    for _ in range(100):
        d = _poly_eval(dc, z)
        if d == 0:
            break
        step = _poly_eval(fc, z) / d
        z -= step
        if abs(step) <= eps * max(1, abs(z)):
            break
    return z


def _mp_fuchs_line(Xr, w, alpha0, ctx):
    """V(j) = slope j + intercept at extended precision (see fuchs_index)."""
    p, q = w
    conv = lambda c: _mp_number(c, ctx)
    Pe = [conv(c) for c in Xr[0].eta_polynomial()]
    Qe = [conv(c) for c in Xr[1].eta_polynomial()]
    P1 = _poly_eval(Pe, alpha0)
    dP1 = _poly_eval(_poly_deriv(Pe), alpha0) if len(Pe) > 1 else 0
    dQ1 = _poly_eval(_poly_deriv(Qe), alpha0) if len(Qe) > 1 else 0
    intercept = ctx.mpf(q) / p * (alpha0 * dP1 + P1) - dQ1
    return lambda j: P1 * j + intercept


# ---------------------------------------------------------------- curves

@dataclass
class CurveCandidate:
    F: BiPoly
    weights: tuple
    s: int
    F_s: BiPoly
    exact: bool
    valid_degree: int = None
    branches: list = field(default_factory=list)
    K: BiPoly = None
    r_bar: int = None
    K_rbar: BiPoly = None
    cofactor_residual: float = None
    notes: list = field(default_factory=list)

    def F_hat_axis(self, rho):
        """F(rho^p, 0): the curve on the section phi = 0."""
        p, _ = self.weights
        return float(np.real(self.F(rho ** p, 0.0)))


def _conjugate_closed(branches, tol):
    used = set()
    for i, b in enumerate(branches):
        if i in used:
            continue
        if abs(complex(b.alpha0).imag) <= tol:
            used.add(i)
            continue
        target = [complex(c).conjugate() for c in b.coeffs]
        found = None
        for k, other in enumerate(branches):
            if k == i or k in used or other.weights != b.weights:
                continue
            oc = [complex(c) for c in other.coeffs]
            m = min(len(oc), len(target))
            if all(abs(oc[t] - target[t]) <= tol * max(1.0, abs(target[t])) for t in range(m)):
                found = k
                break
        if found is None:
            return False
        b.partner, branches[found].partner = found, i
        used.update({i, found})
    return True


def _rationalize(value, max_den=10 ** 6, tol=1e-9):
    frac = Fraction(value).limit_denominator(max_den)
    return frac if abs(float(frac) - value) <= tol * max(1.0, abs(value)) else None


def _leading_form_has_real_zeros(Fs):
    try:
        roots = circle_roots(trig_substitute(Fs))
    except ValueError:
        return True
    return bool(roots)


def assemble_curve(branches, M=None, powers=None, tol=1e-9, X=None):
    """F = prod (y - y_i)^(m_i) recognised as a real BiPoly graded by (p,q).

    All branches must share one weight.  When every branch terminates the
    product is exact; if the field ``X`` is given, a rationalised F is then
    certified by exact division of X(F) by F.
    """
    if not branches:
        raise BranchError("no branches to assemble")
    weights = branches[0].weights
    if any(b.weights != weights for b in branches):
        raise BranchError("branches of different weights; combine curves instead")
    powers = list(powers or [1] * len(branches))
    if not _conjugate_closed(branches, 1e-8):
        raise BranchError("branch list is not closed under complex conjugation")
    p, q = weights
    M = min(b.order for b in branches) if M is None else M
    terminating = all(b.terminates() and b.last_nonzero() * sum(powers) <= M for b in branches)
    poly = [TruncatedSeries({0: Fraction(1)}, None, p)]
    for b, mult in zip(branches, powers):
        ys = b.series(exact_if_terminating=terminating)
        if not terminating:
            ys = ys.truncate(q + M + 1)
        for _ in range(mult):
            new = [None] * (len(poly) + 1)
            for k in range(len(new)):
                term = poly[k - 1] if k >= 1 else None
                other = (-(ys * poly[k])) if k < len(poly) else None
                if term is None:
                    new[k] = other
                elif other is None:
                    new[k] = term
                else:
                    new[k] = term + other
            poly = new
    d = len(poly) - 1
    s = q * d
    terms = {}
    scale = max(abs(complex(b.alpha0)) for b in branches) ** d if branches else 1.0
    exact_coeffs = all(b.exact for b in branches) and terminating
    for j, ser in enumerate(poly):
        for e, c in ser.coeffs.items():
            if not terminating and q * j + e > s + M:
                continue
            cc = complex(c)
            if e % p:
                if abs(cc) > tol * max(1.0, scale):
                    raise BranchError(f"fractional power x^({e}/{p}) survives in the product")
                continue
            if exact_coeffs:
                g = GaussRational.coerce(c)
                if g.im != 0:
                    raise BranchError("exact product has a nonzero imaginary part")
                terms[(e // p, j)] = g.re
            else:
                if abs(cc.imag) > 1e-7 * max(1.0, abs(cc), scale):
                    raise BranchError(f"imaginary residue {cc.imag:.3e} in assembled curve")
                terms[(e // p, j)] = cc.real
    F = BiPoly({k: v for k, v in terms.items() if isinstance(v, Fraction) or abs(v) > 1e-14 * max(1.0, scale)})
    exact = exact_coeffs
    notes = []
    if terminating and not exact_coeffs:
        rat = {k: _rationalize(v) for k, v in F.terms.items()}
        if all(v is not None for v in rat.values()):
            candidate = BiPoly(rat)
            if X is not None:
                _, rem = poly_divide(X.apply(candidate), candidate)
                if rem.is_zero():
                    F, exact = candidate, True
                    notes.append("rationalised coefficients certified by exact division")
                else:
                    notes.append("rationalised coefficients failed exact division; kept floating curve")
            else:
                F, exact = candidate, True
                notes.append("rationalised coefficients (no field given for certification)")
    Fs = F.component(p, q, s)
    if Fs.is_zero():
        raise BranchError("leading form F_s vanishes")
    curve = CurveCandidate(F, weights, s, Fs, exact, None if exact else s + M, list(branches), notes=notes)
    if _leading_form_has_real_zeros(Fs):
        raise BranchError("leading form F_s has real zeros on the circle (real linear factor); "
                          "no isolated real zero at the origin")
    return curve


def curve_from_polynomial(F, weights, X=None):
    """Wrap a known polynomial invariant curve."""
    p, q = weights
    s = F.min_weighted_degree(p, q)
    return CurveCandidate(F, tuple(weights), s, F.component(p, q, s), F.is_rational(), None)


def combine_curves(curves, powers, weights):
    """F = prod F_i^(m_i) with cofactor K = sum m_i K_i (exact curves only)."""
    F = BiPoly({(0, 0): Fraction(1)})
    K = BiPoly()
    for c, m in zip(curves, powers):
        if not c.exact or c.K is None:
            raise BranchError("combine_curves needs exact curves with cofactors")
        F = F * c.F ** m
        K = K + c.K * m
    p, q = weights
    s = F.min_weighted_degree(p, q)
    out = CurveCandidate(F, tuple(weights), s, F.component(p, q, s), True, None)
    out.K = K
    _set_leading_cofactor(out, weights)
    return out


def _set_leading_cofactor(curve, weights, tol=0.0):
    p, q = weights
    graded = curve.K.graded(p, q)
    scale = curve.K.max_abs()
    nz = [d for d, part in graded.items() if part.max_abs() > tol * scale]
    if curve.K.is_zero() or not nz:
        curve.r_bar, curve.K_rbar = None, BiPoly()
    else:
        curve.r_bar = nz[0]
        curve.K_rbar = graded[nz[0]]


def extract_cofactor(X, curve, M=None, tol=1e-7):
    """K = X(F)/F: exact division for polynomial F, graded division otherwise."""
    p, q = curve.weights
    XF = X.apply(curve.F)
    if curve.exact:
        K, rem = poly_divide(XF, curve.F)
        if not rem.is_zero():
            raise BranchError("X(F) is not divisible by F: curve is not invariant")
        curve.K = K
        curve.cofactor_residual = 0.0
        _set_leading_cofactor(curve, curve.weights)
        return K
    from .diagram import qh_decompose
    r = qh_decompose(X, (p, q)).r
    s = curve.s
    top = curve.valid_degree - s if M is None else min(M, curve.valid_degree - s)
    Fg = curve.F.map_coeffs(float).graded(p, q)
    XFg = XF.map_coeffs(float).graded(p, q)
    Fs = Fg[s]
    scale = max(1.0, XF.max_abs())
    for k in range(0, r):
        part = XFg.get(s + k)
        if part is not None and part.max_abs() > tol * scale:
            raise BranchError(f"X(F) has a component below degree s + r (k = {k})")
    K = {}
    worst = 0.0
    for k in range(r, r + top + 1):
        target = XFg.get(s + k, BiPoly())
        for i, Ki in ((i, BiPoly(v)) for i, v in _group(K, p, q).items()):
            if s + k - i in Fg:
                target = target - Ki * Fg[s + k - i]
        basis = [(a, (k - p * a) // q) for a in range(k // p + 1) if (k - p * a) % q == 0 and k - p * a >= 0]
        if not basis:
            if target.max_abs() > tol * scale:
                raise BranchError(f"no monomials of weighted degree {k} can absorb the residual")
            continue
        rows = sorted({key for b in basis for key in (Fs * BiPoly.monomial(*b)).terms} | set(target.terms))
        A = np.zeros((len(rows), len(basis)))
        rhs = np.zeros(len(rows))
        index = {key: n for n, key in enumerate(rows)}
        for col, b in enumerate(basis):
            for key, c in (Fs * BiPoly.monomial(*b)).terms.items():
                A[index[key], col] = float(c)
        for key, c in target.terms.items():
            rhs[index[key]] = float(c)
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        resid = float(np.max(np.abs(A @ sol - rhs))) if len(rows) else 0.0
        worst = max(worst, resid / scale)
        if resid > tol * scale:
            raise BranchError(f"graded division leaves residual {resid:.3e} at degree {k}: "
                              f"F is not invariant at this truncation")
        for b, v in zip(basis, sol):
            if abs(v) > 1e-13 * scale:
                K[b] = v
    curve.K = BiPoly(K)
    curve.cofactor_residual = worst
    _set_leading_cofactor(curve, curve.weights, tol=1e-9)
    return curve.K


def _group(K, p, q):
    out = {}
    for (a, b), v in K.items():
        out.setdefault(p * a + q * b, {})[(a, b)] = v
    return out


def branches_for_weight(X, w, M, decomposition=None):
    """Extend one branch per nonreal nonzero root of Q; returns (branches, problems)."""
    from .diagram import qh_decompose
    dec = decomposition or qh_decompose(X, w)
    Qp = q_polynomial(dec.leading(), w)
    if Qp.degenerate:
        return [], ["determining polynomial vanishes identically"]
    out, problems = [], []
    for z in Qp.nonzero_roots():
        alpha0 = Qp.gaussian_root(z) or z
        try:
            out.append(extend_branch(X, w, alpha0, M, dec))
        except BranchError as exc:
            problems.append(f"root {complex(z):.6g}: {exc}")
    return out, problems
