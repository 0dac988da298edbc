import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centerfocus.algebra import (
    BiPoly, ExpressionError, FourierPoly, GaussRational, SeriesError, TruncatedSeries, circle_roots, compose,
    cos_poly, divide, lie_derivative, parse_coefficient_expression, poly_divide, poly_gcd, sin_poly,
    trig_substitute,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)
gauss = st.builds(GaussRational, small, small)


def bipolys(max_deg=3):
    key = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg))
    return st.dictionaries(key, small, max_size=5).map(BiPoly)


# ------------------------------------------------------------ expressions

def test_expression_arithmetic_is_exact():
    assert parse_coefficient_expression("1/3 + 1/6") == Fraction(1, 2)
    assert parse_coefficient_expression("0.1") == Fraction(1, 10)
    assert parse_coefficient_expression("-(2 - 5)*a", {"a": Fraction(2, 7)}) == Fraction(6, 7)
    assert parse_coefficient_expression("1e-3") == Fraction(1, 1000)


@pytest.mark.parametrize("text, column", [("1 +", 3), ("2 $ 3", 2), ("(1", 2), ("x", 0), ("2^3", 1)])
def test_expression_errors_report_position(text, column):
    with pytest.raises(ExpressionError) as info:
        parse_coefficient_expression(text)
    assert info.value.position == column


# ------------------------------------------------------------ Gaussian rationals

@given(gauss, gauss, gauss)
def test_gauss_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b != 0:
        assert (a / b) * b == a


def test_gauss_conjugate_and_modulus():
    z = GaussRational(Fraction(1, 2), 3)
    assert z * z.conjugate() == GaussRational(Fraction(37, 4))
    assert complex(z) == complex(0.5, 3.0)


# ------------------------------------------------------------ bivariate polynomials

@given(bipolys(), bipolys(), bipolys())
@settings(max_examples=60)
def test_bipoly_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a - a).is_zero()


@given(bipolys(), bipolys())
@settings(max_examples=40)
def test_bipoly_product_rule(a, b):
    assert (a * b).diff_x() == a.diff_x() * b + a * b.diff_x()
    assert (a * b).diff_y() == a.diff_y() * b + a * b.diff_y()


@given(bipolys(), st.integers(1, 3), st.integers(1, 4))
@settings(max_examples=40)
def test_graded_parts_reassemble(a, p, q):
    parts = a.graded(p, q)
    total = BiPoly()
    for d, part in parts.items():
        assert all(p * i + q * j == d for i, j in part.terms)
        total = total + part
    assert total == a


def test_divide_and_gcd():
    x, y = BiPoly.x(), BiPoly.y()
    f = x * x + y * y
    g = x - y * 2
    quotient, remainder = poly_divide(f * g, f)
    assert quotient == g and remainder.is_zero()
    h = poly_gcd(f * g, f * (x + 1))
    assert poly_divide(h, f)[1].is_zero() and h.degree() == 2


def test_lie_derivative_of_a_first_integral_vanishes():
    x, y = BiPoly.x(), BiPoly.y()
    H = x ** 4 * Fraction(1, 2) + y * y
    assert lie_derivative(y, -(x ** 3), H).is_zero()


def test_evaluation_matches_exact():
    a = BiPoly({(2, 1): Fraction(3, 2), (0, 3): Fraction(-1)})
    assert a.evaluate_exact(Fraction(1, 2), Fraction(2)) == Fraction(3, 4) - 8
    assert a(0.5, 2.0) == pytest.approx(3 / 4 - 8)


# ------------------------------------------------------------ trigonometric polynomials

def test_trig_substitution_identity():
    c, s = cos_poly(), sin_poly()
    one = c * c + s * s
    phi = np.linspace(0, 2 * math.pi, 17)
    assert np.allclose([float(one(t)) for t in phi], 1.0, atol=1e-15)
    f = trig_substitute(BiPoly({(2, 0): Fraction(1), (0, 2): Fraction(3)}))
    assert float(f(0.3)) == pytest.approx(math.cos(0.3) ** 2 + 3 * math.sin(0.3) ** 2)


def test_circle_roots_of_sign_definite_poly_are_empty():
    f = trig_substitute(BiPoly({(4, 0): Fraction(1), (0, 2): Fraction(2)}))
    assert circle_roots(f) == []


def test_circle_roots_multiplicities():
    # cos(phi)^2 * sin(phi): double roots at pi/2, 3pi/2 and simple ones at 0, pi
    f = trig_substitute(BiPoly({(2, 1): Fraction(1)}))
    roots = circle_roots(f)
    got = sorted((round(r.angle, 12), r.multiplicity) for r in roots)
    want = sorted((round(a, 12), m) for a, m in [(0.0, 1), (math.pi / 2, 2), (math.pi, 1), (3 * math.pi / 2, 2)])
    assert got == want
    assert all(r.certified for r in roots)


@given(st.lists(st.floats(0.05, 3.0), min_size=1, max_size=3, unique=True))
@settings(max_examples=25, deadline=None)
def test_circle_roots_recover_planted_zeros(angles):
    # product of sin(phi - a) has simple zeros at a and a + pi
    f = FourierPoly.constant(1)
    for a in angles:
        f = f * (sin_poly() * math.cos(a) - cos_poly() * math.sin(a))
    want = sorted(x % (2 * math.pi) for a in angles for x in (a, a + math.pi))
    if min(np.diff(want), default=1.0) < 1e-3:
        return
    got = sorted(r.angle for r in circle_roots(f))
    assert np.allclose(got, want, atol=1e-9)


# ------------------------------------------------------------ truncated series

def test_series_division_terminates_for_exact_quotients():
    a = TruncatedSeries.from_list([Fraction(1), Fraction(0), Fraction(-1)])
    b = TruncatedSeries.from_list([Fraction(1), Fraction(1)])
    q = divide(a, b)
    assert q.is_exact() and q.coeffs == {0: 1, 1: -1}


def test_series_geometric_division_is_truncated():
    one = TruncatedSeries.from_list([Fraction(1)])
    b = TruncatedSeries.from_list([Fraction(1), Fraction(-1)])
    q = divide(one, b, max_terms=10)
    assert q.order == 10 and all(q.coeff(e) == 1 for e in range(10))


def test_series_order_bookkeeping():
    a = TruncatedSeries({1: Fraction(1), 2: Fraction(3)}, order=5)
    b = TruncatedSeries({2: Fraction(2)}, order=4)
    assert (a + b).order == 4
    assert (a * b).order == min(5 + 2, 4 + 1)
    assert a.differentiate().order == 4


def test_series_compose_and_fractional_base():
    exp_like = TruncatedSeries.from_list([Fraction(1), Fraction(1), Fraction(1, 2)], order=3)
    inner = TruncatedSeries({2: Fraction(1)}, order=None, n=2)  # t^2 with x = t^2, i.e. x itself
    out = compose(exp_like, inner)
    assert out.n == 2 and out.coeff(0) == 1 and out.coeff(2) == 1 and out.coeff(4) == Fraction(1, 2)
    with pytest.raises(SeriesError):
        compose(inner, exp_like)


@given(st.lists(small, min_size=1, max_size=5), st.lists(small, min_size=1, max_size=4))
@settings(max_examples=40)
def test_series_division_inverts_multiplication(num, den):
    if den[0] == 0:
        return
    a = TruncatedSeries.from_list(num, order=len(num) + 6)
    b = TruncatedSeries.from_list(den)
    q = divide(a, b)
    back = q * b
    assert back.equals(a)
