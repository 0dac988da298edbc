import cmath
from fractions import Fraction

import pytest

from centerfocus.algebra import BiPoly
from centerfocus.branches import (
    BranchError, assemble_curve, branch_residual, branches_for_weight, extract_cofactor, fuchs_index, q_polynomial,
)
from centerfocus.diagram import qh_decompose
from centerfocus.suite import invariant_curve
from helpers import corpus_field


def determining(X, w):
    return q_polynomial(qh_decompose(X, w).leading(), w)


def same_up_to_sign(got, want):
    want = list(want)
    while want and want[-1] == 0:
        want.pop()
    return got == want or got == [-c for c in want]


def test_determining_polynomials():
    a = Fraction(1, 5)
    assert same_up_to_sign(determining(corpus_field("andreev"), (1, 2)).coeffs, [1, 0, 2])
    assert same_up_to_sign(determining(corpus_field("algaba", a=a), (2, 3)).coeffs,
                           [1, 0, 6 * a, 0, Fraction(3, 2)])
    A, B, C, D = 2, 1, -3, 1
    got = determining(corpus_field("quasihomogeneous", A=A, B=B, C=C, D=D), (1, 3)).coeffs
    assert same_up_to_sign(got, [-C, 3 * A - D, 3 * B])


def test_manyosa2_roots():
    Qp = determining(corpus_field("manyosa2", a="1"), (1, 3))
    assert Qp.monic_roots_equal([9, -3, 1])


def test_real_roots_are_reported():
    Qp = determining(corpus_field("quasihomogeneous", A=1, B=1, C=-1, D=-3), (1, 3))
    assert Qp.real_roots()


def test_fuchs_indices():
    X = corpus_field("andreev")
    lead = qh_decompose(X, (1, 2)).leading()
    Qp = q_polynomial(lead, (1, 2))
    for z in Qp.nonzero_roots():
        res = fuchs_index(lead, (1, 2), Qp.gaussian_root(z) or z)
        assert res.j_star == -4
        assert res.verdict == "n=p"
    a = 1
    X = corpus_field("manyosa2", a=a)
    lead = qh_decompose(X, (1, 3)).leading()
    Qp = q_polynomial(lead, (1, 3))
    root = cmath.sqrt(a * a - 4)
    want = 6 * root / (5 * a + 3 * root)
    got = [complex(fuchs_index(lead, (1, 3), z).j_star) for z in Qp.nonzero_roots()]
    assert min(abs(g - want) for g in got) < 1e-10


def test_algaba_curve_and_cofactor():
    a, alpha, beta = Fraction(1, 5), Fraction(1), Fraction(1)
    X = corpus_field("algaba", a=a, alpha=alpha, beta=beta)
    curve = invariant_curve(X, (2, 3), M=20)
    want_F = {(6, 0): Fraction(2, 3), (3, 2): 4 * a, (0, 4): Fraction(1)}
    want_K = {(4, 0): 12 * alpha, (1, 2): 12 * beta}
    lead = complex(curve.F.coeff(0, 4))
    F = {k: complex(v) / lead for k, v in curve.F.terms.items() if abs(complex(v)) > 1e-12}
    assert set(F) == set(want_F)
    assert all(abs(F[k] - float(v)) < 1e-9 for k, v in want_F.items())
    K = {k: complex(v) for k, v in curve.K.terms.items() if abs(complex(v)) > 1e-12}
    assert set(K) == set(want_K)
    assert all(abs(K[k] - float(v)) < 1e-9 for k, v in want_K.items())
    assert curve.s == 12 and curve.r_bar == 8


def test_quasihomogeneous_curve_is_exact():
    A, B, C, D = Fraction(1), Fraction(1), Fraction(-1), Fraction(1)
    X = corpus_field("quasihomogeneous", A=A, B=B, C=C, D=D)
    curve = invariant_curve(X, (1, 3))
    assert curve.exact and curve.s == 6
    assert curve.K == BiPoly({(2, 0): 3 * A + D})
    assert X.apply(curve.F) == curve.K * curve.F


def test_andreev_branch_residual_is_small():
    X = corpus_field("andreev")
    branches, problems = branches_for_weight(X, (1, 2), 12)
    assert not problems and len(branches) == 2
    for b in branches:
        res = branch_residual(X, (1, 2), b.coeffs, 2 + 12 + 1)
        assert max(abs(complex(v)) for v in res.values()) < 1e-10
    curve = assemble_curve(branches, 12, X=X)
    extract_cofactor(X, curve)
    # leading cofactor (4/5) P x^2 with P = 1
    assert complex(curve.K.coeff(2, 0)) == pytest.approx(0.8, abs=1e-12)


def test_assembly_needs_conjugate_pairs():
    X = corpus_field("andreev")
    branches, _ = branches_for_weight(X, (1, 2), 6)
    with pytest.raises(BranchError):
        assemble_curve(branches[:1], 6)
