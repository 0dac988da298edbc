"""Exact and truncated arithmetic kernels."""

from fractions import Fraction

from .bipoly import BiPoly, lie_derivative, poly_divide, poly_gcd
from .expr import ExpressionError, parse_coefficient_expression
from .fourier import CircleRoot, FourierPoly, circle_roots, cos_poly, sin_poly, trig_substitute
from .gauss import GaussRational
from .series import SeriesError, TruncatedSeries, compose, divide, series_arith

Rational = Fraction

__all__ = [
    "BiPoly", "CircleRoot", "ExpressionError", "FourierPoly", "Fraction", "GaussRational",
    "Rational", "SeriesError", "TruncatedSeries", "circle_roots", "compose", "cos_poly",
    "divide", "lie_derivative", "parse_coefficient_expression", "poly_divide", "poly_gcd",
    "series_arith", "sin_poly", "trig_substitute",
]
