"""Trigonometric polynomials stored in the exponential basis e^{ik phi}."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy
from scipy.optimize import brentq, minimize_scalar

from .gauss import GaussRational, is_exact

TWO_PI = 2.0 * math.pi

# cos = (z + 1/z)/2 and sin = (z - 1/z)/(2i) as Laurent polynomials
_COS = {1: GaussRational(Fraction(1, 2)), -1: GaussRational(Fraction(1, 2))}
_SIN = {1: GaussRational(0, Fraction(-1, 2)), -1: GaussRational(0, Fraction(1, 2))}


def _laurent_mul(a, b):
    out = {}
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            k = k1 + k2
            out[k] = out.get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


class _PowerCache:
    def __init__(self, base):
        self.powers = [{0: GaussRational(1)}, base]

    def __getitem__(self, n):
        while len(self.powers) <= n:
            self.powers.append(_laurent_mul(self.powers[-1], self.powers[1]))
        return self.powers[n]


_COS_POW = _PowerCache(_COS)
_SIN_POW = _PowerCache(_SIN)


class FourierPoly:
    """Sum of c_k e^{ik phi}; ``real`` marks c_{-k} = conj(c_k)."""

    __slots__ = ("coeffs", "real")

    def __init__(self, coeffs=None, real=True):
        self.coeffs = {int(k): c for k, c in dict(coeffs or {}).items() if c != 0}
        self.real = real

    @classmethod
    def constant(cls, c):
        return cls({0: GaussRational(c) if isinstance(c, (int, Fraction)) else c})

    @property
    def order(self):
        return max((abs(k) for k in self.coeffs), default=0)

    def is_zero(self):
        return not self.coeffs

    def is_exact(self):
        return all(is_exact(c) for c in self.coeffs.values())

    def coeff(self, k):
        return self.coeffs.get(k, 0)

    def __add__(self, other):
        if not isinstance(other, FourierPoly):
            other = FourierPoly.constant(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return FourierPoly(out, self.real and other.real)

    __radd__ = __add__

    def __neg__(self):
        return FourierPoly({k: -c for k, c in self.coeffs.items()}, self.real)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FourierPoly):
            real = self.real and isinstance(other, (int, float, Fraction))
            return FourierPoly({k: c * other for k, c in self.coeffs.items()}, real)
        return FourierPoly(_laurent_mul(self.coeffs, other.coeffs), self.real and other.real)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FourierPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        total = np.zeros(phi.shape, dtype=complex)
        for k, c in self.coeffs.items():
            total = total + complex(c) * np.exp(1j * k * phi)
        if self.real:
            total = total.real
        return total if total.ndim else total[()]

    def cos_sin_coefficients(self):
        """(a_k, b_k) with f = a_0 + sum a_k cos k phi + b_k sin k phi (real f)."""
        a = {0: complex(self.coeff(0)).real}
        b = {}
        for k in range(1, self.order + 1):
            cp, cm = complex(self.coeff(k)), complex(self.coeff(-k))
            a[k] = (cp + cm).real
            b[k] = (1j * (cp - cm)).real
        return a, b

    def z_polynomial(self):
        """Coefficients (high -> low) of z^N f(z) with N = order, as complex numbers."""
        n = self.order
        return [complex(self.coeff(k)) for k in range(n, -n - 1, -1)]

    def tan_half_polynomial(self):
        """Exact rational coefficients (low -> high) of (1+t^2)^N f(2 atan t)."""
        n = self.order
        total = [GaussRational(0)] * (2 * n + 1)
        for k, c in self.coeffs.items():
            c = GaussRational.coerce(c)
            a, b = n + k, n - k
            # (1 + i t)^a (1 - i t)^b
            pa = [GaussRational(math.comb(a, m)) * (GaussRational(0, 1) ** m) for m in range(a + 1)]
            pb = [GaussRational(math.comb(b, m)) * (GaussRational(0, -1) ** m) for m in range(b + 1)]
            for i, u in enumerate(pa):
                if not u:
                    continue
                for j, v in enumerate(pb):
                    if v:
                        total[i + j] = total[i + j] + c * u * v
        if any(t.im != 0 for t in total):
            raise ValueError("tan-half polynomial is not real; input is not a real trigonometric polynomial")
        return [t.re for t in total]

    def __repr__(self):
        return f"FourierPoly({self.coeffs!r}, real={self.real})"


def trig_substitute(poly):
    """P(cos phi, sin phi) as an exact FourierPoly."""
    out = {}
    for (i, j), c in poly.terms.items():
        term = _laurent_mul(_COS_POW[i], _SIN_POW[j])
        for k, v in term.items():
            out[k] = out.get(k, 0) + v * c
    real = all(isinstance(c, (int, Fraction, float)) for c in poly.terms.values())
    return FourierPoly({k: v for k, v in out.items() if v != 0}, real)


def cos_poly():
    return FourierPoly(dict(_COS))


def sin_poly():
    return FourierPoly(dict(_SIN))


@dataclass(frozen=True)
class CircleRoot:
    angle: float
    multiplicity: int
    certified: bool

    def __float__(self):
        return self.angle


def _normalize_angle(phi):
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if phi >= TWO_PI - 1e-12 or phi < 1e-12:
        phi = 0.0
    return phi


def _exact_circle_roots(f):
    coeffs = f.tan_half_polynomial()
    t = sympy.Symbol("t")
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    n = f.order
    roots = []
    if not coeffs:
        raise ValueError("identically zero trigonometric polynomial")
    deg = len(coeffs) - 1
    if deg < 2 * n:
        roots.append(CircleRoot(math.pi, 2 * n - deg, True))
    if deg > 0:
        poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], t,
                          domain="QQ")
        _, factors = poly.sqf_list()
        for factor, mult in factors:
            if factor.degree() <= 0:
                continue
            for (lo, hi), _ in factor.intervals(eps=sympy.Rational(1, 10 ** 18)):
                tm = (float(lo) + float(hi)) / 2.0
                roots.append(CircleRoot(_normalize_angle(2.0 * math.atan(tm)), mult, True))
    return sorted(roots, key=lambda r: r.angle)


def _numeric_circle_roots(f, tol):
    zc = f.z_polynomial()
    while zc and zc[0] == 0:
        zc.pop(0)
    if len(zc) <= 1:
        return []
    zs = np.roots(zc)
    cand = sorted(_normalize_angle(float(np.angle(z))) for z in zs if abs(abs(z) - 1.0) <= tol)
    if not cand:
        return []
    # cluster nearby angles (multiple roots split by ~eps^(1/m))
    clusters = [[cand[0]]]
    for a in cand[1:]:
        if a - clusters[-1][-1] <= max(10 * tol, 1e-7):
            clusters[-1].append(a)
        else:
            clusters.append([a])
    if len(clusters) > 1 and (clusters[0][0] + TWO_PI - clusters[-1][-1]) <= max(10 * tol, 1e-7):
        clusters[0] = [a - TWO_PI for a in clusters[-1]] + clusters[0]
        clusters.pop()
    scale = max(abs(c) for c in zc)
    roots = []
    width = max(50 * tol, 1e-6)
    for cl in clusters:
        mult = len(cl)
        center = float(np.mean(cl))
        if mult % 2 == 1:
            lo, hi = center - width, center + width
            flo, fhi = float(f(lo)), float(f(hi))
            if flo * fhi < 0:
                center = brentq(lambda s: float(f(s)), lo, hi, xtol=1e-15, rtol=1e-15)
        else:
            res = minimize_scalar(lambda s: abs(float(f(s))), bounds=(center - width, center + width),
                                  method="bounded", options={"xatol": 1e-14})
            center = float(res.x)
            if abs(float(f(center))) > 1e-8 * scale:
                continue
        roots.append(CircleRoot(_normalize_angle(center), mult, False))
    return sorted(roots, key=lambda r: r.angle)


def circle_roots(f, tol=1e-6):
    """Real zeros of a real trigonometric polynomial on [0, 2 pi).

    Exact coefficients go through square-free factorisation of the
    tan-half-angle polynomial (certified multiplicities); inexact ones use the
    companion roots of z^N f, filtered to the unit circle, with a cluster
    estimate of the multiplicity.
    """
    if not f.real:
        raise ValueError("circle_roots needs a real-flagged trigonometric polynomial")
    if f.is_zero():
        raise ValueError("identically zero trigonometric polynomial")
    if f.is_exact():
        return _exact_circle_roots(f)
    return _numeric_circle_roots(f, tol)
