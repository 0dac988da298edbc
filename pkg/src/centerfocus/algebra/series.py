"""Truncated Puiseux series in t = x^(1/n).

A series stores coefficients for integer exponents of t together with an
exclusive truncation ``order``: every coefficient with exponent < order is
correct, nothing is known at or beyond it.  ``order=None`` marks an exact
(finite) series.  Order bookkeeping for a (valuation va, order Ma) and
b (vb, Mb):

* a + b      -> min(Ma, Mb)
* a * b      -> min(Ma + vb, Mb + va)
* a / b      -> min(Ma - vb, Mb - 2 vb + va)
* a o b      -> min(vb * Ma, Mb)            (a a power series, vb >= 1)
* d/dx a     -> Ma - n
"""

import math
from fractions import Fraction

INF = math.inf

DEFAULT_DIVISION_TERMS = 32


class SeriesError(ArithmeticError):
    pass


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _bound(order):
    return INF if order is None else order


def _order(bound):
    return None if bound == INF else int(bound)


class TruncatedSeries:
    __slots__ = ("coeffs", "order", "n", "var")

    def __init__(self, coeffs=None, order=None, n=1, var="x"):
        if n < 1:
            raise ValueError("base denominator must be positive")
        bound = _bound(order)
        self.coeffs = {int(e): c for e, c in dict(coeffs or {}).items() if c != 0 and e < bound}
        self.order = order
        self.n = int(n)
        self.var = var

    @classmethod
    def from_list(cls, values, start=0, order=None, n=1, var="x"):
        return cls({start + k: v for k, v in enumerate(values)}, order, n, var)

    @classmethod
    def identity(cls, n=1, var="x"):
        return cls({1: Fraction(1)}, None, n, var)

    def is_exact(self):
        return self.order is None

    def valuation(self):
        return min(self.coeffs, default=None)

    def coeff(self, e):
        if self.order is not None and e >= self.order:
            raise SeriesError(f"coefficient t^{e} beyond truncation order {self.order}")
        return self.coeffs.get(e, 0)

    def leading(self):
        v = self.valuation()
        return None if v is None else self.coeffs[v]

    def rescale(self, n_new):
        if n_new % self.n:
            raise ValueError(f"cannot rescale denominator {self.n} to {n_new}")
        f = n_new // self.n
        order = None if self.order is None else self.order * f
        return TruncatedSeries({e * f: c for e, c in self.coeffs.items()}, order, n_new, self.var)

    def _common(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries({0: other}, None, self.n, self.var)
        n = _lcm(self.n, other.n)
        return self.rescale(n), other.rescale(n), n

    def truncate(self, order):
        new = min(_bound(self.order), order)
        return TruncatedSeries(self.coeffs, _order(new), self.n, self.var)

    def __add__(self, other):
        a, b, n = self._common(other)
        out = dict(a.coeffs)
        for e, c in b.coeffs.items():
            out[e] = out.get(e, 0) + c
        return TruncatedSeries(out, _order(min(_bound(a.order), _bound(b.order))), n, self.var)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries({e: -c for e, c in self.coeffs.items()}, self.order, self.n, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return TruncatedSeries({e: v * c for e, v in self.coeffs.items()}, self.order, self.n, self.var)

    def shift(self, k):
        """Multiply by t^k."""
        order = None if self.order is None else self.order + k
        return TruncatedSeries({e + k: c for e, c in self.coeffs.items()}, order, self.n, self.var)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        a, b, n = self._common(other)
        va, vb = a.valuation(), b.valuation()
        if va is None or vb is None:
            # zero times anything: known up to the other's order shifted
            bound = min(_bound(a.order) + (vb if vb is not None else 0),
                        _bound(b.order) + (va if va is not None else 0))
            return TruncatedSeries({}, _order(bound), n, self.var)
        bound = min(_bound(a.order) + vb, _bound(b.order) + va)
        out = {}
        for e1, c1 in a.coeffs.items():
            for e2, c2 in b.coeffs.items():
                e = e1 + e2
                if e < bound:
                    out[e] = out.get(e, 0) + c1 * c2
        return TruncatedSeries(out, _order(bound), n, self.var)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = TruncatedSeries({0: Fraction(1)}, None, self.n, self.var)
        for _ in range(k):
            result = result * self
        return result

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(Fraction(1) / other if isinstance(other, (int, Fraction)) else 1 / other)
        return divide(self, other)

    def differentiate(self):
        """d/dx where x = t^n."""
        out = {}
        for e, c in self.coeffs.items():
            if e != 0:
                out[e - self.n] = c * Fraction(e, self.n)
        order = None if self.order is None else self.order - self.n
        return TruncatedSeries(out, order, self.n, self.var)

    def __call__(self, x):
        total = 0
        for e, c in self.coeffs.items():
            total = total + complex(c) * x ** (e / self.n)
        return total

    def map_coeffs(self, fn):
        return TruncatedSeries({e: fn(c) for e, c in self.coeffs.items()}, self.order, self.n, self.var)

    def __repr__(self):
        return f"TruncatedSeries({self.coeffs!r}, order={self.order}, n={self.n})"

    def equals(self, other, tol=0.0):
        a, b, _ = self._common(other)
        bound = min(_bound(a.order), _bound(b.order))
        keys = {e for e in set(a.coeffs) | set(b.coeffs) if e < bound}
        return all(abs(complex(a.coeffs.get(e, 0) - b.coeffs.get(e, 0))) <= tol for e in keys)


def divide(a, b, max_terms=DEFAULT_DIVISION_TERMS):
    """a / b by long division.

    Exact operands whose quotient terminates give an exact result; otherwise
    the result is truncated after ``max_terms`` terms beyond its valuation.
    """
    a, b, n = a._common(b)
    vb = b.valuation()
    if vb is None:
        raise SeriesError("division by a series with zero leading term")
    b0 = b.coeffs[vb]
    va = a.valuation()
    bound = min(_bound(a.order) - vb, _bound(b.order) - 2 * vb + (va if va is not None else 0))
    if va is None:
        return TruncatedSeries({}, _order(bound), n, a.var)
    exact = bound == INF
    if exact:
        bound = va - vb + max_terms
    rem = dict(a.coeffs)
    out = {}
    e = va - vb
    while e < bound:
        c = rem.get(e + vb, 0)
        if c != 0:
            q = c / b0 if not isinstance(c, int) else Fraction(c) / b0
            out[e] = q
            for eb, cb in b.coeffs.items():
                k = e + eb
                rem[k] = rem.get(k, 0) - q * cb
                if rem[k] == 0:
                    del rem[k]
        rem.pop(e + vb, None)
        if exact and not rem:
            return TruncatedSeries(out, None, n, a.var)
        e += 1
    return TruncatedSeries(out, _order(bound), n, a.var)


def compose(a, b):
    """a(b(t)) for a power series a (nonnegative exponents, n = 1) and val(b) >= 1."""
    if a.n != 1:
        raise SeriesError("outer series of a composition must be an ordinary power series")
    if any(e < 0 for e in a.coeffs):
        raise SeriesError("outer series has negative exponents")
    vb = b.valuation()
    if vb is None or vb < 1:
        raise SeriesError("inner series must have positive valuation")
    bound = min(vb * _bound(a.order), _bound(b.order))
    result = TruncatedSeries({}, None, b.n, b.var)
    power = TruncatedSeries({0: Fraction(1)}, None, b.n, b.var)
    top = max(a.coeffs, default=0)
    for k in range(0, top + 1):
        if k * vb >= bound:
            break
        if k > 0:
            power = (power * b).truncate(bound) if bound != INF else power * b
        c = a.coeffs.get(k, 0)
        if c != 0:
            result = result + power.scale(c)
    return result.truncate(bound) if bound != INF else result


def series_arith(op, a, b=None):
    """Dispatch helper: op in {add, mul, div, compose, differentiate}."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return divide(a, b)
    if op == "compose":
        return compose(a, b)
    if op == "differentiate":
        return a.differentiate()
    raise ValueError(f"unknown series operation {op!r}")
