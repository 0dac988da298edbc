import math

import numpy as np
import pytest

from centerfocus.blowup import BlowupError, mo_class_test, polar_components
from helpers import corpus_field, linear_focus, phi_grid


def test_linear_polar_system():
    ps = polar_components(linear_focus("1/4"), (1, 1))
    assert ps.r == 0 and ps.orientation == "ccw" and ps.omega == []
    for t in phi_grid(9):
        assert float(ps.Fj(0)(t)) == pytest.approx(0.25)
        assert float(ps.Gj(0)(t)) == pytest.approx(1.0)
        assert float(ps.D(t)) == pytest.approx(1.0)


def test_andreev_leading_components():
    ps = polar_components(corpus_field("andreev"), (1, 2))
    c, s = np.cos(phi_grid()), np.sin(phi_grid())
    F1 = np.array([float(ps.Fj(1)(t)) for t in phi_grid()])
    G1 = np.array([float(ps.Gj(1)(t)) for t in phi_grid()])
    assert np.allclose(F1, (1 - c ** 2) * c * s, atol=1e-14)
    assert np.allclose(G1, -c ** 4 - 2 * s ** 2, atol=1e-14)
    assert ps.orientation == "cw" and mo_class_test(ps).in_mo


def test_evaluator_matches_fourier_components():
    X = corpus_field("algaba")
    ps = polar_components(X, (2, 3))
    ev = ps.evaluator()
    rho = 0.03
    for t in (0.1, 1.3, 2.9, 4.4):
        rr, th = ev.scalar(t, rho)
        F = sum(float(ps.Fj(j)(t)) * rho ** (j - ps.r) for j in range(ps.r, ps.j_max + 1))
        G = sum(float(ps.Gj(j)(t)) * rho ** (j - ps.r) for j in range(ps.r, ps.j_max + 1))
        assert rr == pytest.approx(F, rel=1e-12, abs=1e-15)
        assert th == pytest.approx(G, rel=1e-12, abs=1e-15)


def test_blowup_undoes_to_the_cartesian_field():
    # x = rho^p c, y = rho^q s: dx/dt and dy/dt from (R, Theta) must equal (P, Q)
    X = corpus_field("manyosa1", a="1")
    p, q = 1, 3
    ps = polar_components(X, (p, q))
    ev = ps.evaluator()
    for t, rho in [(0.4, 0.2), (2.0, 0.05), (5.1, 0.3)]:
        c, s = math.cos(t), math.sin(t)
        rr, th = ev.scalar(t, rho)
        D = float(ps.D(t))
        scale = rho ** ps.r / D
        rdot, phidot = rho * rr * scale, th * scale
        xdot = p * rho ** (p - 1) * rdot * c - rho ** p * s * phidot
        ydot = q * rho ** (q - 1) * rdot * s + rho ** q * c * phidot
        x, y = rho ** p * c, rho ** q * s
        assert xdot == pytest.approx(float(X.P(x, y)), rel=1e-10, abs=1e-15)
        assert ydot == pytest.approx(float(X.Q(x, y)), rel=1e-10, abs=1e-15)


def test_characteristic_directions_outside_mo():
    ps = polar_components(corpus_field("manyosa1", a="1"), (1, 1))
    assert ps.omega and not mo_class_test(ps).in_mo


def test_non_edge_weights_need_override():
    X = linear_focus("0")
    with pytest.raises(BlowupError):
        polar_components(X, (1, 2))
    assert polar_components(X, (1, 2), override=True).weights == (1, 2)
