"""Weighted polar blow-up x = rho^p cos(phi), y = rho^q sin(phi)."""

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import BiPoly, FourierPoly, circle_roots, cos_poly, sin_poly, trig_substitute
from .diagram import newton_diagram, qh_decompose

DEFAULT_EXTRA_COMPONENTS = 8


class BlowupError(ValueError):
    pass


@dataclass
class PolarSystem:
    weights: tuple
    r: int
    F: dict
    G: dict
    D: FourierPoly
    omega: list
    orientation: str
    decomposition: object = field(repr=False, default=None)
    field_: object = field(repr=False, default=None)
    j_max: int = 0

    @property
    def p(self):
        return self.weights[0]

    @property
    def q(self):
        return self.weights[1]

    @property
    def orientation_sign(self):
        return {"ccw": 1, "cw": -1}.get(self.orientation, 0)

    @property
    def flipped(self):
        """True when downstream code runs the time-reversed field."""
        return self.orientation == "cw"

    def Fj(self, j):
        return self.F.get(j, FourierPoly())

    def Gj(self, j):
        return self.G.get(j, FourierPoly())

    def evaluator(self):
        return PolarEvaluator(self.field_, self.weights, self.r)


def polar_components(X, w, override=False, j_max=None):
    p, q = w
    if not override:
        diagram = newton_diagram(X)
        if tuple(w) not in diagram.weights:
            raise BlowupError(f"weights {tuple(w)} are not edge weights of the Newton diagram "
                              f"{diagram.weights}; pass override=True to force")
    dec = qh_decompose(X, w)
    r = dec.r
    top = max(dec.components)
    if j_max is None:
        j_max = max(r + DEFAULT_EXTRA_COMPONENTS, top)
    c, s = cos_poly(), sin_poly()
    F, G = {}, {}
    for j in range(r, j_max + 1):
        Pj, Qj = dec.component(j)
        Pt, Qt = trig_substitute(Pj), trig_substitute(Qj)
        F[j] = Pt * c + Qt * s
        G[j] = Qt * c * p - Pt * s * q
    D = trig_substitute(BiPoly.x() * BiPoly.x() * p + BiPoly.y() * BiPoly.y() * q)
    Gr = G[r]
    if Gr.is_zero():
        omega, orientation = None, "degenerate"
    else:
        omega = circle_roots(Gr)
        orientation = _orientation(Gr, omega)
    return PolarSystem(tuple(w), r, F, G, D, omega, orientation, dec, X, j_max)


def _orientation(Gr, omega):
    if not omega:
        return "ccw" if float(Gr(0.0)) > 0 else "cw"
    if all(root.multiplicity % 2 == 0 for root in omega):
        angles = [root.angle for root in omega] + [omega[0].angle + 2 * math.pi]
        mids = [(a + b) / 2 for a, b in zip(angles, angles[1:])]
        signs = {np.sign(float(Gr(m))) for m in mids}
        if signs == {1.0}:
            return "ccw"
        if signs == {-1.0}:
            return "cw"
    return "mixed"


def characteristic_directions(ps):
    if ps.omega is None:
        raise BlowupError(f"leading angular component G_{ps.r} vanishes identically")
    return list(ps.omega)


@dataclass(frozen=True)
class MoResult:
    in_mo: bool
    witness: float = None


def mo_class_test(ps):
    omega = characteristic_directions(ps)
    if omega:
        return MoResult(False, omega[0].angle)
    return MoResult(True, None)


class PolarEvaluator:
    """Direct evaluation of R/rho and Theta from the monomials of P and Q.

    Each P monomial a x^i y^k of degree j contributes a c^(i+1) s^k rho^(j-r)
    to R/rho and -q a c^i s^(k+1) rho^(j-r) to Theta; Q monomials contribute
    b c^i s^(k+1) and p b c^(i+1) s^k respectively.
    """

    def __init__(self, X, w, r):
        p, q = w
        self.p, self.q, self.r = p, q, r
        rows = []
        for (i, k), a in X.P.terms.items():
            e = p * i + q * k - p - r
            a = float(a)
            rows.append((i + 1, k, a, i, k + 1, -q * a, e))
        for (i, k), b in X.Q.terms.items():
            e = p * i + q * k - q - r
            b = float(b)
            rows.append((i, k + 1, b, i + 1, k, p * b, e))
        if any(row[-1] < 0 for row in rows):
            raise BlowupError("negative rho exponent: weights give leading degree below r")
        self.rows = rows
        arr = np.array(rows, dtype=float) if rows else np.zeros((0, 7))
        self._arr = arr

    def scalar(self, phi, rho):
        return self.scalar_cs(math.cos(phi), math.sin(phi), rho)

    def scalar_cs(self, c, s, rho):
        rr = th = 0.0
        for ri, rk, ra, ti, tk, ta, e in self.rows:
            rp = rho ** e if e else 1.0
            rr += ra * c ** ri * s ** rk * rp
            th += ta * c ** ti * s ** tk * rp
        return rr, th

    def __call__(self, phi, rho):
        phi = np.asarray(phi, dtype=float)[..., None]
        rho = np.asarray(rho, dtype=float)[..., None]
        c, s = np.cos(phi), np.sin(phi)
        a = self._arr
        rp = rho ** a[:, 6]
        rr = np.sum(a[:, 2] * c ** a[:, 0] * s ** a[:, 1] * rp, axis=-1)
        th = np.sum(a[:, 5] * c ** a[:, 3] * s ** a[:, 4] * rp, axis=-1)
        return rr, th

    def D(self, phi):
        return self.p * math.cos(phi) ** 2 + self.q * math.sin(phi) ** 2


class CofactorEvaluator:
    """D(phi) K(rho^p cos, rho^q sin) / rho^r with rho^(p i + q k - r) per monomial."""

    def __init__(self, K, w, r):
        p, q = w
        self.p, self.q = p, q
        self.rows = [(i, k, float(complex(c).real), p * i + q * k - r) for (i, k), c in K.terms.items()]

    def scalar(self, phi, rho):
        return self.scalar_cs(math.cos(phi), math.sin(phi), rho)

    def scalar_cs(self, c, s, rho):
        total = 0.0
        for i, k, a, e in self.rows:
            total += a * c ** i * s ** k * rho ** e
        return (self.p * c * c + self.q * s * s) * total
