import math

import pytest

from centerfocus.algebra import BiPoly
from centerfocus.blowup import polar_components
from centerfocus.cofactor import (
    CofactorError, beta_fit, beta_quadrature, integral_K, khat, log_identity_check, pv_xi, richardson_sqrt,
    sample_integrals, sign_definite_test,
)
from centerfocus.flow import bautin_coefficients, geometric_grid
from centerfocus.suite import invariant_curve
from helpers import corpus_field, linear_focus


def linear_setup(lam):
    X = linear_focus(lam)
    return X, polar_components(X, (1, 1)), invariant_curve(X, (1, 1))


def test_linear_cofactor_integral():
    X, ps, curve = linear_setup("1/10")
    # F = x^2 + y^2 has cofactor 2 lam
    assert curve.K.degree() == 0 and complex(curve.K.coeff(0, 0)) == pytest.approx(0.2)
    smp = integral_K(ps, X, curve.K, 0.05)
    assert smp.value == pytest.approx(4 * math.pi * 0.1, rel=1e-9)
    assert log_identity_check(ps, X, curve, 0.05, sample=smp) < 1e-9


def test_khat_matches_closed_form_on_linear_focus():
    X, ps, curve = linear_setup("1/10")
    # D = 1, Theta = 1 and K = 2 lam in this chart
    assert khat(ps, curve.K, 0.7, 0.03) == pytest.approx(0.2)


def test_phi_domain_route_agrees_with_time_domain():
    X = corpus_field("algaba")
    ps = polar_components(X, (2, 3))
    curve = invariant_curve(X, (2, 3))
    a = integral_K(ps, X, curve.K, 0.02)
    b = integral_K(ps, X, curve.K, 0.02, method="pv-phi-domain")
    assert b.value == pytest.approx(a.value, rel=1e-7)


def test_oracle_flags_a_wrong_cofactor():
    X, ps, curve = linear_setup("1/10")
    curve.K = curve.K * 2
    smp = sample_integrals(ps, X, curve.K, grid=[0.05], curve=curve)[0]
    assert smp.flagged and smp.discrepancy > 1.0


def test_beta_fit_on_constant_integral():
    X, ps, curve = linear_setup("-1/20")
    samples = sample_integrals(ps, X, curve.K, grid=geometric_grid(1e-3, 1e-1, 8))
    fit = beta_fit(samples, 0, k=2)
    assert fit.beta(0) == pytest.approx(-0.2 * math.pi, rel=1e-8)
    assert abs(fit.beta(1)) < 1e-6
    with pytest.raises(CofactorError):
        beta_fit(samples[:4], 0)


def test_beta_quadrature_matches_lyapunov_quantity():
    X = corpus_field("andreev")
    ps = polar_components(X, (1, 2))
    curve = invariant_curve(X, (1, 2))
    bc = bautin_coefficients(ps, k=2)
    b1, _ = beta_quadrature(ps, curve.K, lambda t: bc.a(1, t), lambda t: bc.a(2, t))
    assert b1 == pytest.approx(4 * bc.eta[1], rel=1e-8)


def test_sign_tests():
    _, _, curve = linear_setup("1/10")
    assert sign_definite_test(curve.K, (1, 1)).verdict == "positive-definite"
    indefinite = BiPoly({(1, 0): 1})
    assert not sign_definite_test(indefinite, (1, 1)).sign_defined


def test_richardson_removes_square_root_terms():
    eps = [2.0 ** -k for k in range(3, 9)]
    vals = [1.5 + 2 * math.sqrt(e) - 0.5 * e for e in eps]
    assert richardson_sqrt(eps, vals) == pytest.approx(1.5, abs=1e-10)


def test_xi_principal_value():
    for a in ("0", "1", "-1/2"):
        ps = polar_components(corpus_field("manyosa1", a=a), (1, 1))
        xi = pv_xi(ps)
        assert xi.exists and xi.value == pytest.approx(math.pi, abs=1e-8)
