from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centerfocus.algebra import BiPoly
from centerfocus.branches import q_polynomial
from centerfocus.diagram import (
    DiagramError, VectorField, axis_invariance, inverse_integrating_factor, newton_diagram, qh_decompose,
)
from helpers import corpus_field, linear_focus

coef = st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda c: c != 0)


def test_linear_focus_has_one_edge():
    d = newton_diagram(linear_focus("1/3"))
    assert d.weights == [(1, 1)]
    assert [e.leading_degree for e in d.edges] == [0]


@pytest.mark.parametrize("name, weights, r", [
    ("andreev", [(1, 2)], [1]),
    ("manyosa1", [(1, 1), (1, 3)], [2, 4]),
    ("quasihomogeneous", [(1, 3)], None),
    ("algaba", [(2, 3)], None),
])
def test_corpus_diagrams(name, weights, r):
    d = newton_diagram(corpus_field(name))
    assert d.weights == weights
    if r is not None:
        assert [e.leading_degree for e in d.edges] == r


def test_armengol_vertices():
    d = newton_diagram(corpus_field("armengol"))
    assert [tuple(v) for v in d.vertices] == [(0, 4), (2, 2), (6, 0)]
    assert d.weights == [(1, 1), (1, 2)]


def test_rejects_regular_point_and_zero_field():
    with pytest.raises(DiagramError):
        VectorField.from_terms([[0, 0, "1"]], [[1, 0, "1"]])
    with pytest.raises(DiagramError):
        VectorField.from_terms([], [])
    with pytest.raises(DiagramError):
        qh_decompose(linear_focus(0), (2, 4))


def test_axis_invariance():
    X = VectorField.from_terms([[1, 0, "1"]], [[0, 1, "1"], [2, 0, "1"]])
    assert axis_invariance(X) == {"x=0": True, "y=0": False}


def random_qh_field(draw, p, q, r):
    """Random field whose components all have (p,q)-degree r."""
    P, Q = {}, {}
    for m in range(0, r + p + 1):
        for n in range(0, r + p + 1):
            if p * m + q * n == p + r and draw(st.booleans()):
                P[(m, n)] = draw(coef)
            if p * m + q * n == q + r and draw(st.booleans()):
                Q[(m, n)] = draw(coef)
    return BiPoly(P), BiPoly(Q)


@st.composite
def qh_fields(draw):
    p = draw(st.integers(1, 3))
    q = draw(st.integers(1, 4).filter(lambda v: v % p or p == 1))
    from math import gcd
    if gcd(p, q) != 1:
        q = p + 1
    r = draw(st.integers(1, 6))
    P, Q = random_qh_field(draw, p, q, r)
    extra = draw(st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)), coef, max_size=3))
    extra = {k: v for k, v in extra.items() if k != (0, 0)}
    P = P + BiPoly(extra)
    if P.is_zero() and Q.is_zero():
        Q = BiPoly({(1, 0): Fraction(1)})
    return VectorField(P, Q), (p, q)


@given(qh_fields())
@settings(max_examples=60, deadline=None)
def test_decomposition_reconstructs_the_field(data):
    X, w = data
    dec = qh_decompose(X, w)
    P, Q = BiPoly(), BiPoly()
    for j in dec.degrees():
        Pj, Qj = dec.component(j)
        P, Q = P + Pj, Q + Qj
    assert P == X.P and Q == X.Q


@given(qh_fields(), st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=4))
@settings(max_examples=60, deadline=None)
def test_components_are_quasihomogeneous(data, lam):
    X, (p, q) = data
    dec = qh_decompose(X, (p, q))
    for j in dec.degrees():
        Pj, Qj = dec.component(j)
        # X_j(lam^p x, lam^q y) = lam^(j) (lam^p P_j, lam^q Q_j)
        assert Pj.substitute_scale(lam ** p, lam ** q) == Pj * lam ** (j + p)
        assert Qj.substitute_scale(lam ** p, lam ** q) == Qj * lam ** (j + q)


@given(qh_fields())
@settings(max_examples=60, deadline=None)
def test_determining_polynomial_is_minus_inverse_integrating_factor(data):
    X, (p, q) = data
    lead = qh_decompose(X, (p, q)).leading()
    V = inverse_integrating_factor(lead, (p, q))
    Qp = q_polynomial(lead, (p, q))
    want = [-c / p for c in V.eta_polynomial()]
    while want and want[-1] == 0:
        want.pop()
    assert Qp.coeffs == want
