"""Sparse bivariate polynomials in x and y."""

from fractions import Fraction

import numpy as np
import sympy

from .gauss import GaussRational, is_exact

X_SYM, Y_SYM = sympy.symbols("x y")


def _is_zero(c):
    return c == 0


class BiPoly:
    """Map (i, j) -> coefficient of x^i y^j with no stored zeros.

    Coefficients are Fractions in the symbolic stages; GaussRational, complex
    or float coefficients are accepted where branch data demands them.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (i, j), c in dict(terms or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            if isinstance(c, int):
                c = Fraction(c)
            if not _is_zero(c):
                key = (int(i), int(j))
                clean[key] = clean.get(key, 0) + c
                if _is_zero(clean[key]):
                    del clean[key]
        self.terms = clean

    @classmethod
    def from_list(cls, triples):
        out = {}
        for i, j, c in triples:
            out[(i, j)] = out.get((i, j), 0) + (Fraction(c) if isinstance(c, (int, str)) else c)
        return cls(out)

    @classmethod
    def monomial(cls, i, j, c=1):
        return cls({(i, j): c})

    @classmethod
    def x(cls):
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def y(cls):
        return cls({(0, 1): Fraction(1)})

    def copy(self):
        return BiPoly(self.terms)

    def is_zero(self):
        return not self.terms

    def is_exact(self):
        return all(is_exact(c) for c in self.terms.values())

    def is_rational(self):
        return all(isinstance(c, (int, Fraction)) for c in self.terms.values())

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self):
        return len(self.terms)

    def coeff(self, i, j):
        return self.terms.get((i, j), 0)

    def degree(self):
        return max((i + j for i, j in self.terms), default=-1)

    def weighted_degree(self, p, q):
        return max((p * i + q * j for i, j in self.terms), default=None)

    def min_weighted_degree(self, p, q):
        return min((p * i + q * j for i, j in self.terms), default=None)

    def graded(self, p, q):
        """Split into (p,q)-quasihomogeneous components keyed by weighted degree."""
        parts = {}
        for (i, j), c in self.terms.items():
            parts.setdefault(p * i + q * j, {})[(i, j)] = c
        return {d: BiPoly(t) for d, t in sorted(parts.items())}

    def component(self, p, q, d):
        return BiPoly({k: c for k, c in self.terms.items() if p * k[0] + q * k[1] == d})

    def truncate_weighted(self, p, q, max_degree):
        return BiPoly({k: c for k, c in self.terms.items() if p * k[0] + q * k[1] <= max_degree})

    def __add__(self, other):
        if not isinstance(other, BiPoly):
            other = BiPoly({(0, 0): other})
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, BiPoly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BiPoly):
            return BiPoly({k: c * other for k, c in self.terms.items()})
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        result = BiPoly({(0, 0): Fraction(1)})
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, BiPoly):
            return self.terms == other.terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def diff_x(self):
        return BiPoly({(i - 1, j): c * i for (i, j), c in self.terms.items() if i > 0})

    def diff_y(self):
        return BiPoly({(i, j - 1): c * j for (i, j), c in self.terms.items() if j > 0})

    def map_coeffs(self, fn):
        return BiPoly({k: fn(c) for k, c in self.terms.items()})

    def to_complex(self):
        return self.map_coeffs(complex)

    def conjugate(self):
        return self.map_coeffs(lambda c: c if isinstance(c, (int, Fraction, float)) else c.conjugate())

    def real_part(self):
        return self.map_coeffs(lambda c: c.real if not isinstance(c, (int, Fraction, float)) else c)

    def imag_part(self):
        return self.map_coeffs(lambda c: c.imag if not isinstance(c, (int, Fraction, float)) else 0)

    def max_abs(self):
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    def __call__(self, x, y):
        """Evaluate; works with scalars and numpy arrays (coefficients cast to complex/float)."""
        total = 0
        for (i, j), c in self.terms.items():
            if isinstance(c, (Fraction, int)):
                cv = float(c)
            elif isinstance(c, GaussRational):
                cv = complex(c)
            else:
                cv = c
            total = total + cv * (x ** i) * (y ** j)
        if isinstance(total, int):
            total = 0.0 * np.asarray(x, dtype=float) if np.ndim(x) else 0.0
        return total

    def evaluate_exact(self, x, y):
        total = Fraction(0)
        for (i, j), c in self.terms.items():
            total = total + c * x ** i * y ** j
        return total

    def substitute_scale(self, lam_x, lam_y):
        """P(lam_x * x, lam_y * y) with exact scalars."""
        return BiPoly({(i, j): c * lam_x ** i * lam_y ** j for (i, j), c in self.terms.items()})

    def eta_polynomial(self):
        """Coefficients (low -> high) of the univariate polynomial P(1, eta)."""
        if not self.terms:
            return []
        deg = max(j for _, j in self.terms)
        out = [Fraction(0)] * (deg + 1)
        for (i, j), c in self.terms.items():
            out[j] = out[j] + c
        return out

    def to_sympy(self):
        expr = sympy.Integer(0)
        for (i, j), c in self.terms.items():
            if isinstance(c, Fraction):
                cs = sympy.Rational(c.numerator, c.denominator)
            elif isinstance(c, GaussRational):
                cs = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
                    c.im.numerator, c.im.denominator)
            else:
                cs = sympy.nsimplify(c)
            expr += cs * X_SYM ** i * Y_SYM ** j
        return expr

    @classmethod
    def from_sympy(cls, expr):
        poly = sympy.Poly(sympy.expand(expr), X_SYM, Y_SYM)
        out = {}
        for (i, j), c in poly.terms():
            c = sympy.nsimplify(c)
            if c.is_Rational:
                out[(i, j)] = Fraction(int(c.p), int(c.q))
            else:
                re, im = c.as_real_imag()
                out[(i, j)] = GaussRational(Fraction(int(re.p), int(re.q)),
                                            Fraction(int(im.p), int(im.q)))
        return cls(out)

    def __repr__(self):
        return f"BiPoly({self.terms!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0])):
            mono = "*".join(s for s in (
                "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                "" if j == 0 else ("y" if j == 1 else f"y^{j}")) if s)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def to_triples(self):
        return [(i, j, c) for (i, j), c in sorted(self.terms.items())]


def poly_gcd(a, b):
    """Exact gcd of two rational BiPolys (normalised by sympy)."""
    g = sympy.gcd(a.to_sympy(), b.to_sympy())
    return BiPoly.from_sympy(g)


def poly_divide(a, b):
    """Exact division a = quotient * b + remainder (rational coefficients)."""
    q, r = sympy.div(sympy.Poly(a.to_sympy(), X_SYM, Y_SYM), sympy.Poly(b.to_sympy(), X_SYM, Y_SYM))
    return BiPoly.from_sympy(q.as_expr()), BiPoly.from_sympy(r.as_expr())


def lie_derivative(P, Q, F):
    """X(F) = P * F_x + Q * F_y."""
    return P * F.diff_x() + Q * F.diff_y()
