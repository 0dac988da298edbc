"""Newton diagram of a planar vector field and quasihomogeneous splitting."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BiPoly, parse_coefficient_expression


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class VectorField:
    P: BiPoly
    Q: BiPoly
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.P.is_zero() and self.Q.is_zero():
            raise DiagramError("vector field is identically zero")
        if self.P.coeff(0, 0) != 0 or self.Q.coeff(0, 0) != 0:
            raise DiagramError("origin is not a singular point (P(0,0) or Q(0,0) nonzero)")

    @classmethod
    def from_terms(cls, P_terms, Q_terms, params=None, name=""):
        """Build from [[i, j, "expr"], ...] lists; expressions are evaluated exactly."""
        params = {k: Fraction(v) if not isinstance(v, str) else parse_coefficient_expression(v)
                  for k, v in (params or {}).items()}

        def build(terms):
            out = {}
            for item in terms:
                if len(item) != 3:
                    raise DiagramError(f"term {item!r} must be [i, j, coefficient]")
                i, j, c = item
                if not (isinstance(i, int) and isinstance(j, int)) or i < 0 or j < 0:
                    raise DiagramError(f"exponents must be nonnegative integers, got {item!r}")
                value = parse_coefficient_expression(str(c) if not isinstance(c, str) else c, params)
                out[(i, j)] = out.get((i, j), 0) + value
            return BiPoly(out)

        return cls(build(P_terms), build(Q_terms), params, name)

    def scaled(self, c):
        return VectorField(self.P * c, self.Q * c, self.params, self.name)

    def apply(self, F):
        """Lie derivative X(F) = P F_x + Q F_y."""
        return self.P * F.diff_x() + self.Q * F.diff_y()


@dataclass(frozen=True)
class Edge:
    start: tuple
    end: tuple
    members: tuple
    weights: tuple
    line_value: int
    leading_degree: int


@dataclass(frozen=True)
class NewtonDiagram:
    support: frozenset
    vertices: tuple
    edges: tuple
    warnings: tuple = ()

    @property
    def weights(self):
        return [e.weights for e in self.edges]

    def edge_for(self, weights):
        for e in self.edges:
            if e.weights == tuple(weights):
                return e
        return None


def vector_support(X):
    """Shifted support: x^m y^n in P -> (m, n+1); in Q -> (m+1, n)."""
    pts = {(m, n + 1) for (m, n) in X.P.terms}
    pts |= {(m + 1, n) for (m, n) in X.Q.terms}
    return pts


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_diagram(X):
    support = vector_support(X) if isinstance(X, VectorField) else set(X)
    if not support:
        raise DiagramError("empty support")
    pts = sorted(support)
    hull = []
    for pt in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    vertices = [hull[0]]
    for pt in hull[1:]:
        if pt[1] < vertices[-1][1]:
            vertices.append(pt)
        else:
            break
    edges = []
    warnings = []
    for a, b in zip(vertices, vertices[1:]):
        di, dj = b[0] - a[0], a[1] - b[1]
        g = math.gcd(di, dj)
        q, p = di // g, dj // g
        ell = p * a[0] + q * a[1]
        members = tuple(sorted(pt for pt in support if p * pt[0] + q * pt[1] == ell))
        r = ell - p - q
        if r < 1:
            warnings.append(f"edge with weights ({p},{q}) has leading degree r = {r} < 1")
        edges.append(Edge(a, b, members, (p, q), ell, r))
    return NewtonDiagram(frozenset(support), tuple(vertices), tuple(edges), tuple(warnings))


@dataclass(frozen=True)
class QHDecomposition:
    weights: tuple
    components: dict
    r: int

    def leading(self):
        return self.components[self.r]

    def component(self, j):
        return self.components.get(j, (BiPoly(), BiPoly()))

    def degrees(self):
        return sorted(self.components)


def qh_decompose(X, w):
    p, q = w
    if p <= 0 or q <= 0 or math.gcd(p, q) != 1:
        raise DiagramError(f"weights {w} must be coprime positive integers")
    comps = {}
    for (m, n), c in X.P.terms.items():
        j = p * m + q * n - p
        comps.setdefault(j, ({}, {}))[0][(m, n)] = c
    for (m, n), c in X.Q.terms.items():
        j = p * m + q * n - q
        comps.setdefault(j, ({}, {}))[1][(m, n)] = c
    components = {j: (BiPoly(a), BiPoly(b)) for j, (a, b) in sorted(comps.items())}
    return QHDecomposition((p, q), components, min(components))


def inverse_integrating_factor(Xr, w):
    """V = p x Q_{q+r} - q y P_{p+r} for the leading pair Xr = (P, Q)."""
    p, q = w
    P, Q = Xr
    return BiPoly.x() * Q * p - BiPoly.y() * P * q


def axis_invariance(X):
    """Which coordinate axes are invariant: x = 0 iff x | P, y = 0 iff y | Q."""
    x_inv = all(i >= 1 for i, _ in X.P.terms) if not X.P.is_zero() else True
    y_inv = all(j >= 1 for _, j in X.Q.terms) if not X.Q.is_zero() else True
    return {"x=0": x_inv, "y=0": y_inv}
