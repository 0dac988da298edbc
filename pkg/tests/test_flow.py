import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centerfocus.blowup import polar_components
from centerfocus.flow import (
    FlowConfig, FlowError, a1_closed_quadrature, bautin_coefficients, eta1_estimate, geometric_grid, integrate_turn,
    poincare_map,
)
from helpers import corpus_field, linear_focus, phi_grid


def test_linear_return_map_is_exact():
    lam = 0.05
    ps = polar_components(linear_focus(str(lam)), (1, 1))
    for r0 in (1e-3, 0.02):
        smp = poincare_map(ps, rho0=r0)
        assert smp.status == "completed"
        assert smp.rho1 / r0 == pytest.approx(math.exp(2 * math.pi * lam), rel=1e-9)


def test_clockwise_systems_still_return_in_increasing_phi():
    ps = polar_components(linear_focus("1/20"), (1, 1))
    X = linear_focus("1/20").scaled(-1)
    ps_cw = polar_components(X, (1, 1))
    assert ps_cw.orientation == "cw"
    a = poincare_map(ps, rho0=0.01).rho1
    b = poincare_map(ps_cw, rho0=0.01).rho1
    # reversing time does not change the geometric return map in increasing phi
    assert a == pytest.approx(b, rel=1e-9)


@given(st.floats(-0.2, 0.2), st.floats(1e-3, 5e-2))
@settings(max_examples=15, deadline=None)
def test_forward_and_backward_turns_invert(lam, r0):
    ps = polar_components(linear_focus(repr(lam)), (1, 1))
    fwd = integrate_turn(ps, rho0=r0, direction=1)
    if not fwd.completed or fwd.rho_end >= 0.4:
        return
    back = integrate_turn(ps, rho0=fwd.rho_end, direction=-1)
    assert back.rho_end == pytest.approx(r0, rel=1e-8)


@given(st.lists(st.floats(1e-3, 8e-2), min_size=2, max_size=3, unique=True))
@settings(max_examples=8, deadline=None)
def test_return_map_is_increasing(radii):
    ps = polar_components(corpus_field("quasihomogeneous"), (1, 3))
    radii = sorted(radii)
    if min(np.diff(radii)) < 1e-6:
        return
    images = [poincare_map(ps, rho0=r).rho1 for r in radii]
    assert all(b > a for a, b in zip(images, images[1:]))


def test_escape_and_bad_start():
    ps = polar_components(linear_focus("1"), (1, 1))
    assert integrate_turn(ps, rho0=0.1).status == "escaped"
    with pytest.raises(FlowError):
        integrate_turn(ps, rho0=0.7)


def test_trajectory_states_are_continuous():
    ps = polar_components(corpus_field("andreev"), (1, 2))
    traj = integrate_turn(ps, rho0=0.05)
    phi0, rho0, _ = traj.state(0.0)
    phi1, rho1, _ = traj.state(traj.arc_length)
    assert phi0 == pytest.approx(0.0, abs=1e-14) and rho0 == pytest.approx(0.05)
    assert phi1 == pytest.approx(2 * math.pi, abs=1e-9) and rho1 == pytest.approx(traj.rho_end)


def test_grid_is_decreasing():
    g = geometric_grid(1e-3, 1e-1, 5)
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(1e-3)
    assert all(b < a for a, b in zip(g, g[1:]))


def test_a1_closed_forms():
    phi = phi_grid()
    ps = polar_components(corpus_field("andreev"), (1, 2))
    a1 = bautin_coefficients(ps, k=1).a(1, phi)
    ref = 2 ** 0.75 / (11 - 4 * np.cos(2 * phi) + np.cos(4 * phi)) ** 0.25
    assert np.max(np.abs(a1 - ref)) < 1e-8
    assert a1_closed_quadrature(ps) == pytest.approx(1.0, abs=1e-9)


def test_bautin_matches_numeric_return_map():
    X = corpus_field("andreev")
    ps = polar_components(X, (1, 2))
    bc = bautin_coefficients(ps, k=4)
    r0 = 2e-3
    series = sum(e * r0 ** (i + 1) for i, e in enumerate(bc.eta))
    assert poincare_map(ps, X, r0, config=FlowConfig(rtol=1e-12, atol=1e-14)).rho1 == pytest.approx(series, rel=1e-9)


def test_bautin_needs_the_monodromic_class():
    ps = polar_components(corpus_field("manyosa1", a="0"), (1, 3))
    with pytest.raises(FlowError):
        bautin_coefficients(ps)


def test_eta1_estimate_on_a_linear_focus():
    ps = polar_components(linear_focus("-1/10"), (1, 1))
    est = eta1_estimate(ps)
    assert est.value == pytest.approx(math.exp(-0.2 * math.pi), rel=1e-8)
