"""Gaussian rationals Q(i): exact complex numbers with rational parts."""

from fractions import Fraction
from numbers import Rational


class GaussRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, GaussRational):
            return value
        if isinstance(value, (Rational, int)):
            return cls(value, 0)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussRational")

    def _other(self, other):
        if isinstance(other, GaussRational):
            return other
        if isinstance(other, (Rational, int)):
            return GaussRational(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) + other
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) - other
        return GaussRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return other - complex(self)
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) * other
        return GaussRational(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return complex(self) / other
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussRational((self.re * o.re + self.im * o.im) / den,
                             (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return complex(self) ** n
        result = GaussRational(1)
        base = self if n >= 0 else GaussRational(1) / self
        for _ in range(abs(n)):
            result = result * base
        return result

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __abs__(self):
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            try:
                return complex(self) == complex(other)
            except TypeError:
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def is_exact(value):
    return isinstance(value, (int, Fraction, GaussRational))


def to_complex(value):
    return complex(value)


def conj(value):
    if isinstance(value, (int, Fraction)):
        return value
    return value.conjugate()
