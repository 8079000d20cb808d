import numpy as np
import pytest

from normsol import DomainSpec, Params, build_grid, continue_to_limit, eps_schedule

INTERVAL = DomainSpec("interval", 1.0, None)
BALL3 = DomainSpec("radial_ball", 1.0, 3)


def interval_params(**kw):
    base = dict(dim=1, r=0.5, p=8.0, rho=0.01, eps=1.0, domain=INTERVAL)
    base.update(kw)
    return Params(**base)


def ball_params(**kw):
    base = dict(dim=3, r=0.5, p=4.0, rho=0.01, eps=1.0, domain=BALL3, strict_paper_regime=True)
    base.update(kw)
    return Params(**base)


@pytest.fixture(scope="session")
def ball512():
    return build_grid(BALL3, 512)


@pytest.fixture(scope="session")
def ball256():
    return build_grid(BALL3, 256)


@pytest.fixture(scope="session")
def interval1024():
    return build_grid(INTERVAL, 1024)


@pytest.fixture(scope="session")
def default_solve(ball512):
    """The bundled default problem solved along the default schedule."""
    iterates = []

    def hook(eps, it, vals, energy):
        iterates.append((eps, it, vals, energy))

    res = continue_to_limit(ball_params(), ball512, eps_schedule(1.0, 0.5, 1e-8), callback=hook)
    return res, iterates


def smooth_positive(grid, rng, bumps=3):
    """Random smooth profile, positive on interior nodes, zero on the boundary."""
    x = np.asarray(grid.nodes)
    L = grid.domain.length_or_radius
    window = x * (L - x) * 4 / L**2 if grid.kind == "interval" else 1 - (x / L) ** 2
    prof = np.full_like(x, 0.1)
    for _ in range(bumps):
        c, s, h = rng.uniform(0.1 * L, 0.9 * L), rng.uniform(0.1, 0.4) * L, rng.uniform(0.2, 1.0)
        prof += h * np.exp(-(((x - c) / s) ** 2))
    vals = prof * window
    vals[~grid.interior_mask] = 0.0
    return vals


# -- acceptance reporting -------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    prev = _ACCEPTANCE.get(number, (title, True))
    if rep.when == "call" or rep.failed:
        _ACCEPTANCE[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
