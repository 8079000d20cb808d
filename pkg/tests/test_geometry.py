import math

import numpy as np
import pytest

from normsol import Field, build_grid, estimate_gn_constant, find_rho0, first_eigenpair, g_critical, geometry_report
from normsol.errors import RegimeError
from normsol.geometry import (
    g_function,
    g_t0_at,
    gn_constant_from_trials,
    gn_exponent,
    gn_quotient,
    gn_trial_functions,
    rho0_estimate,
    singular_bound_constant,
    witness_rho_threshold,
)

from conftest import INTERVAL, ball_params, interval_params


@pytest.mark.parametrize(
    "N,p,a", [(3, 4.0, 0.75), (3, 10 / 3, 0.6), (4, 3.5, 6 / 7), (1, 8.0, 0.375)]
)
def test_gn_exponent(N, p, a):
    assert math.isclose(gn_exponent(N, p), a, rel_tol=1e-14)


def test_gn_exponent_mass_critical_threshold():
    a = gn_exponent(3, 10 / 3)
    assert math.isclose(a * (10 / 3), 2.0, rel_tol=1e-14)


def test_gn_exponent_rejects_p_le_2():
    with pytest.raises(ValueError):
        gn_exponent(3, 2.0)


def test_gn_constant_sin_only(interval1024):
    a = gn_exponent(1, 4.0)
    u = Field.from_function(interval1024, lambda x: np.sin(np.pi * x))
    C = gn_constant_from_trials(interval1024, 4.0, a, [u])
    expected = 1.1 * (3 / 8) ** 0.25 / ((np.pi**2 / 2) ** (a / 2) * 0.5 ** ((1 - a) / 2))
    assert math.isclose(C, expected, rel_tol=1e-5)


def test_gn_constant_superset_and_determinism(ball256):
    params = ball_params()
    C8 = estimate_gn_constant(ball256, params, trial_count=8, seed=4)
    C32 = estimate_gn_constant(ball256, params, trial_count=32, seed=4)
    assert C32 >= C8
    assert estimate_gn_constant(ball256, params, trial_count=32, seed=4) == C32
    extra = gn_trial_functions(ball256, 5, 99)
    assert estimate_gn_constant(ball256, params, 32, 4, extra_trials=extra) >= C32


def test_gn_inequality_holds_on_trials(ball256):
    params = ball_params()
    C = estimate_gn_constant(ball256, params, trial_count=16, seed=0)
    a = gn_exponent(3, 4.0)
    for u in gn_trial_functions(ball256, 16, 0):
        assert gn_quotient(ball256, u, 4.0, a) <= C


def test_synthetic_critical_point():
    t0, g0 = g_critical(0.0, 1.0, 0.75, 4.0, 0.5)
    assert math.isclose(t0, 4 / 3, rel_tol=1e-14)
    assert math.isclose(g0, 8 / 27, rel_tol=1e-14)
    assert math.isclose(float(g_function(t0, 0.0, 1.0, 0.75, 4.0, 0.5)), g0, rel_tol=1e-13)


def test_singular_bound_constant():
    assert math.isclose(singular_bound_constant(0.5, 1.0, 1.0), 2 * math.sqrt(2), rel_tol=1e-15)


def test_regime_error():
    with pytest.raises(RegimeError):
        g_critical(1.0, 1.0, 0.5, 4.0, 0.5)  # a p = 2
    with pytest.raises(RegimeError):
        geometry_report(interval_params(p=4.0), 1.0, 0.0)
    with pytest.raises(RegimeError):
        find_rho0(interval_params(p=6.0), 1.0)


def test_report_formulas():
    params = ball_params(rho=0.02)
    C = 0.5
    rep = geometry_report(params, C, 9.87)
    vol = 4 * math.pi / 3
    a = 0.75
    assert math.isclose(rep.C1, 0.02**0.25 * vol**0.75 + vol, rel_tol=1e-14)
    assert math.isclose(rep.C2, C**4 * 0.02 ** ((1 - a) * 2), rel_tol=1e-14)
    assert rep.tau == rep.t0 > 0
    assert math.isclose(rep.M, (rep.Cs + rep.Cp) / 0.02, rel_tol=1e-14)
    assert rep.rho_admissible == (rep.g_t0 > 0)
    assert rep.lambda1 == 9.87


@pytest.mark.parametrize("C", [0.3, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("rho", [1e-3, 0.01, 0.1])
def test_critical_point_properties(C, rho):
    rep = geometry_report(ball_params(rho=rho), C, 0.0)
    ap = rep.a * 4.0
    assert abs(rep.t0 - rep.C2 * rep.a * rep.t0 ** (ap - 1)) <= 1e-9 * rep.t0
    g = lambda t: float(g_function(t, rep.C1, rep.C2, rep.a, 4.0, 0.5))
    assert g(rep.t0 / 2) < rep.g_t0
    assert g(2 * rep.t0) < rep.g_t0


def test_halving_rho_increases_t0_and_g():
    base = ball_params()
    reps = [geometry_report(base.replace(rho=0.01 / 2**k), 0.467, 0.0) for k in range(4)]
    assert all(b.t0 > a.t0 for a, b in zip(reps, reps[1:]))
    assert all(b.g_t0 > a.g_t0 for a, b in zip(reps, reps[1:]))


def test_find_rho0_bisection_contract():
    params = ball_params()
    C = 0.467
    rho0 = find_rho0(params, C)
    assert rho0 > 0
    assert g_t0_at(params, C, rho0 / 2) > 0
    assert g_t0_at(params, C, rho0) > 0
    assert g_t0_at(params, C, rho0 * (1 + 2e-6)) <= 0
    # continuity across the final bracket
    assert abs(g_t0_at(params, C, rho0 * (1 + 2e-6)) - g_t0_at(params, C, rho0)) < 1e-3


def test_doubling_C_shrinks_rho0():
    params = ball_params()
    values = [find_rho0(params, C) for C in (0.25, 0.5, 1.0, 2.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_find_rho0_large_C_gives_small_positive_threshold():
    rho0 = find_rho0(ball_params(), 50.0)
    assert 0 < rho0 < 1e-6
    assert g_t0_at(ball_params(), 50.0, rho0 / 2) > 0


def test_rho0_estimate_is_min_of_thresholds(ball256):


    params = ball_params()
    phi = first_eigenpair(ball256).phi1
    C = estimate_gn_constant(ball256, params)
    est = rho0_estimate(params, ball256, C, phi)
    assert est == min(find_rho0(params, C), witness_rho_threshold(params, ball256, C, phi))
    assert 0.01 < est


def test_default_config_geometry_admissible(ball512):
    params = ball_params()
    C = estimate_gn_constant(ball512, params)
    assert geometry_report(params, C, 0.0).g_t0 > 0
    assert geometry_report(params.replace(rho=10.0), C, 0.0).g_t0 <= 0


def test_interval_gn_constant_uses_window():
    g = build_grid(INTERVAL, 256)
    C = estimate_gn_constant(g, interval_params(), trial_count=4, seed=1)
    assert C > 0 and math.isfinite(C)
