import math

import numpy as np
import pytest

from normsol import DomainSpec, build_grid, first_eigenpair, grad_norm_sq, mass
from normsol.errors import ConvergenceError

from conftest import BALL3, INTERVAL


@pytest.fixture(scope="module", params=["interval", "ball"])
def pair(request):
    domain = INTERVAL if request.param == "interval" else BALL3
    return first_eigenpair(build_grid(domain, 2048))


def test_lambda1_is_pi_squared(pair):
    tol = 1e-3 if pair.phi1.grid.kind == "interval" else 1e-2
    assert abs(pair.lambda1 - np.pi**2) < tol


def test_normalized_and_positive(pair):
    g = pair.phi1.grid
    assert abs(mass(g, pair.phi1) - 1.0) <= 1e-10
    assert np.all(pair.phi1.values[g.interior_mask] > 0)


def test_rayleigh_quotient_and_residual(pair):
    g = pair.phi1.grid
    rq = grad_norm_sq(g, pair.phi1) / mass(g, pair.phi1)
    assert abs(rq - pair.lambda1) <= 1e-8 * pair.lambda1
    assert pair.residual() <= 1e-8 * pair.lambda1


def test_interval_scaling():
    l1 = first_eigenpair(build_grid(INTERVAL, 512)).lambda1
    l2 = first_eigenpair(build_grid(DomainSpec("interval", 2.0, None), 512)).lambda1
    assert math.isclose(l2, l1 / 4, rel_tol=1e-6)


def test_ball_radius_scaling():
    l1 = first_eigenpair(build_grid(BALL3, 256)).lambda1
    l2 = first_eigenpair(build_grid(DomainSpec("radial_ball", 2.0, 3), 256)).lambda1
    assert l2 < l1
    assert math.isclose(l2, l1 / 4, rel_tol=1e-6)


def test_phi1_matches_analytic_profile():
    g = build_grid(INTERVAL, 1024)
    phi = first_eigenpair(g).phi1.values
    exact = np.sqrt(2) * np.sin(np.pi * np.asarray(g.nodes))
    assert np.max(np.abs(phi - exact)) < 1e-5


def test_non_convergence_raises():
    with pytest.raises(ConvergenceError):
        first_eigenpair(build_grid(INTERVAL, 256), max_iter=1)
