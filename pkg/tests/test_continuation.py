import math

import numpy as np
import pytest

from normsol import (
    MinimizeOptions,
    continue_to_limit,
    eps_schedule,
    extract_lambda,
    mass,
    sweep_rho,
)
from normsol.continuation import cauchy_trend_ok, prepare_geometry
from normsol.errors import GeometryInadmissible

from conftest import ball_params

SCHEDULE = eps_schedule(1.0, 0.5, 1e-8)


# -- eps_schedule -------------------------------------------------------------


def test_schedule_ten_values():
    s = eps_schedule(1.0, 0.5, 1e-3)
    assert len(s) == 10
    assert math.isclose(s[-1], 0.5**9) and s[0] == 1.0


def test_schedule_single():
    assert eps_schedule(1.0, 0.9, 1.0) == [1.0]


@pytest.mark.parametrize("args", [(1.0, 1.5, 1e-3), (1.0, 0.0, 1e-3), (2.0, 0.5, 1e-3), (0.5, 0.5, 1.0)])
def test_schedule_errors(args):
    with pytest.raises(ValueError):
        eps_schedule(*args)


def test_schedule_is_strictly_decreasing():
    s = eps_schedule(0.8, 0.3, 1e-9)
    assert all(b < a for a, b in zip(s, s[1:]))
    assert s[-1] >= 1e-9


# -- cauchy trend -------------------------------------------------------------


@pytest.mark.parametrize(
    "gaps,ok",
    [
        ([], True),
        ([1.0], True),
        ([3.0, 2.0, 1.0], True),
        ([1.0, 2.0, 3.0], False),
        ([5.0, 1e-7, 5e-7], True),
        ([9.0, 1.0, 3.0, 2.0, 1.0], True),
    ],
)
def test_cauchy_trend(gaps, ok):
    assert cauchy_trend_ok(gaps) is ok


# -- continue_to_limit --------------------------------------------------------


def test_default_run_passes(default_solve):
    res, _ = default_solve
    assert res.passed, res.checks
    assert math.isfinite(res.lam)
    assert res.u.min_interior() > 0
    assert res.log.records[-1].eps <= 1e-4
    assert len(res.log) == len(SCHEDULE)


def test_records_respect_window_and_mass(default_solve, ball512):
    res, _ = default_solve
    geo = res.geometry
    for rec in res.log.records:
        assert -geo.lambda1 < rec.lam <= geo.M
        assert abs(mass(ball512, rec.u) - 0.01) <= 1e-10 * 0.01
        assert rec.singular_mass > 0
    assert res.log.beta > 0
    eps = [r.eps for r in res.log.records]
    assert all(b < a for a, b in zip(eps, eps[1:]))


def test_final_lambda_consistent(default_solve, ball512):
    res, _ = default_solve
    last = res.log.records[-1]
    lam = extract_lambda(res.params, ball512, res.u, eps=last.eps)
    assert abs(lam - res.lam) <= 1e-12 * abs(res.lam)


def test_schedule_to_1e4_keeps_monitors(ball512):
    # eps down to 1e-4 converges and keeps every monitor except the eps = 0 residual,
    # which scales with the last eps (about 0.18 here)
    res = continue_to_limit(ball_params(), ball512, eps_schedule(1.0, 0.5, 1e-4))
    for key in ("lambda_window", "positivity", "beta_floor", "linf_bound", "cauchy_trend", "converged_all"):
        assert res.checks[key], key
    assert res.checks["residual_eps0"] > 1e-3


def test_single_eps_schedule(ball256):
    res = continue_to_limit(ball_params(), ball256, [0.5])
    assert len(res.log) == 1
    assert res.checks["cauchy_trend"] is True
    assert res.log.cauchy_gaps == []


def test_rho_too_large_raises_before_solving(ball256):
    seen = []
    with pytest.raises(GeometryInadmissible) as info:
        continue_to_limit(
            ball_params(rho=10.0), ball256, SCHEDULE, callback=lambda *a: seen.append(a)
        )
    assert seen == []
    assert info.value.report.g_t0 <= 0


def test_schedule_validation(ball256):
    with pytest.raises(ValueError):
        continue_to_limit(ball_params(), ball256, [])
    with pytest.raises(ValueError):
        continue_to_limit(ball_params(), ball256, [0.1, 0.2])
    with pytest.raises(ValueError):
        continue_to_limit(ball_params(), ball256, [2.0, 1.0])


def test_prepared_geometry_reused(ball256):
    prepared = prepare_geometry(ball_params(), ball256)
    a = continue_to_limit(ball_params(), ball256, SCHEDULE[:6], prepared=prepared)
    b = continue_to_limit(ball_params(), ball256, SCHEDULE[:6])
    assert np.array_equal(a.u.values, b.u.values)


def test_stall_is_recorded_and_continuation_proceeds(ball256):
    res = continue_to_limit(ball_params(), ball256, SCHEDULE[:3], MinimizeOptions(min_step=2.0))
    assert len(res.log) == 3
    assert all(r.stalled for r in res.log.records)
    assert res.checks["converged_all"] is False
    assert not res.passed


def test_record_dict_has_no_field(default_solve):
    d = default_solve[0].log.records[0].as_dict()
    assert "u" not in d and d["lambda_window"] == "ok"


# -- sweep --------------------------------------------------------------------


@pytest.fixture(scope="module")
def sweep(ball256):
    return sweep_rho(ball_params(), ball256, [0.002, 0.005, 0.01], SCHEDULE)


def test_sweep_three_passing(sweep):
    assert [e.rho for e in sweep] == [0.002, 0.005, 0.01]
    assert all(e.passed for e in sweep)
    lams = [e.result.lam for e in sweep]
    assert lams[0] > lams[1] > lams[2]


def test_sweep_order_independent(sweep, ball256):
    rev = sweep_rho(ball_params(), ball256, [0.01, 0.005, 0.002], SCHEDULE, threads=3)
    for a, b in zip(sweep, reversed(rev)):
        assert a.rho == b.rho
        assert np.array_equal(a.result.u.values, b.result.u.values)
        assert a.result.lam == b.result.lam


def test_sweep_records_failures(ball256):
    out = sweep_rho(ball_params(), ball256, [0.01, 10.0], SCHEDULE[:4])
    assert out[0].result is not None
    assert out[1].result is None and "GeometryInadmissible" in out[1].error
    assert not out[1].passed


def test_sweep_empty_list(ball256):
    with pytest.raises(ValueError):
        sweep_rho(ball_params(), ball256, [], SCHEDULE)
