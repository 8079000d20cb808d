"""Constants controlling the constrained geometry of the regularized energy.

For u >= 0 with int u^2 = rho and t = |grad u|_2 the energy is bounded below
by

    g(t) = t^2 / 2 - C1 / (1 - r) - C2 / p * t^(a p)

with a = N (1/2 - 1/p) the Gagliardo-Nirenberg exponent, C the GN constant,
C1 = rho^((1-r)/2) |Omega|^((1+r)/2) + |Omega| and C2 = C^p rho^((1-a)p/2).
When a p > 2, g has a single positive critical point t0, a global maximum; the
trust radius tau is t0 and the mass is admissible when g(t0) > 0.  The same
constants bound the Lagrange multiplier from above by M = (Cs + Cp) / rho.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Field, FieldLike, Grid, Params, grad_norm_sq, lp_integral, mass, values_of
from .errors import RegimeError

__all__ = [
    "GeometryReport",
    "gn_exponent",
    "gn_quotient",
    "gn_trial_functions",
    "gn_constant_from_trials",
    "estimate_gn_constant",
    "g_function",
    "g_critical",
    "singular_bound_constant",
    "geometry_report",
    "g_t0_at",
    "find_rho0",
    "witness_rho_threshold",
    "rho0_estimate",
    "GN_SAFETY",
]

GN_SAFETY = 1.1


@dataclass(frozen=True)
class GeometryReport:
    a: float
    C: float
    C1: float
    C2: float
    t0: float
    g_t0: float
    tau: float
    rho_admissible: bool
    M: float
    Cp: float
    Cs: float
    lambda1: float

    def as_dict(self) -> dict:
        return asdict(self)


def gn_exponent(N: int, p: float) -> float:
    """a = N (1/2 - 1/p)."""
    if not p > 2:
        raise ValueError(f"Gagliardo-Nirenberg exponent needs p > 2, got {p}")
    return N * (0.5 - 1.0 / p)


def gn_quotient(grid: Grid, u: FieldLike, p: float, a: float) -> float:
    """|u|_p / (|grad u|_2^a |u|_2^(1-a))."""
    vals = np.abs(values_of(grid, u))
    lp = lp_integral(grid, vals, p) ** (1.0 / p)
    grad = math.sqrt(grad_norm_sq(grid, vals))
    l2 = math.sqrt(mass(grid, vals))
    return lp / (grad**a * l2 ** (1.0 - a))


def gn_trial_functions(grid: Grid, count: int, seed: int) -> list[Field]:
    """Deterministic family of smooth nonnegative test profiles.

    Sums of one to three Gaussian bumps of random centre, width and height,
    multiplied by a window vanishing on the boundary.  Widths are kept above
    eight cells so every bump is resolved.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(grid.nodes)
    length = grid.domain.length_or_radius
    if grid.kind == "interval":
        window = x * (length - x) * (4.0 / length**2)
        lo_c, hi_c = 0.1 * length, 0.9 * length
    else:
        window = 1.0 - (x / length) ** 2
        lo_c, hi_c = 0.0, 0.8 * length
    w_min = max(0.02 * length, 8.0 * grid.h)
    w_max = 0.4 * length
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 4))
        centres = rng.uniform(lo_c, hi_c, k)
        widths = np.exp(rng.uniform(math.log(w_min), math.log(w_max), k))
        heights = rng.uniform(0.2, 1.0, k)
        prof = np.zeros_like(x)
        for c, s, hgt in zip(centres, widths, heights):
            prof += hgt * np.exp(-(((x - c) / s) ** 2))
        out.append(Field.from_function(grid, lambda _x, v=prof * window: v))
    return out


def _polynomial_bumps(grid: Grid) -> list[Field]:
    x = np.asarray(grid.nodes)
    length = grid.domain.length_or_radius
    if grid.kind == "interval":
        base = x * (length - x) * (4.0 / length**2)
    else:
        base = 1.0 - (x / length) ** 2
    return [Field.from_function(grid, lambda _x, k=k: base**k) for k in (1, 2, 4, 8)]


def gn_constant_from_trials(
    grid: Grid, p: float, a: float, trials: Iterable[FieldLike], safety: float = GN_SAFETY
) -> float:
    """``safety`` times the largest GN quotient over ``trials``."""
    best = max(gn_quotient(grid, u, p, a) for u in trials)
    return safety * best


def estimate_gn_constant(
    grid: Grid,
    params: Params,
    trial_count: int = 32,
    seed: int = 0,
    extra_trials: Sequence[FieldLike] = (),
    safety: float = GN_SAFETY,
) -> float:
    """Sampled Gagliardo-Nirenberg constant for L^p on the grid's domain.

    The trial set is the first eigenfunction, a few polynomial bumps,
    ``trial_count`` seeded random bumps and any ``extra_trials``.  The true
    best constant is unknown, so this is a lower estimate of it inflated by
    ``safety``.
    """
    from .eigen import first_eigenpair

    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    a = gn_exponent(params.dim, params.p)
    trials: list[FieldLike] = [first_eigenpair(grid).phi1]
    trials += _polynomial_bumps(grid)
    trials += gn_trial_functions(grid, trial_count, seed)
    trials += list(extra_trials)
    return gn_constant_from_trials(grid, params.p, a, trials, safety)


def g_function(t, C1: float, C2: float, a: float, p: float, r: float):
    """Lower bound of the energy on the sphere |grad u|_2 = t."""
    t = np.asarray(t, dtype=float)
    return 0.5 * t**2 - C1 / (1.0 - r) - C2 / p * t ** (a * p)


def g_critical(C1: float, C2: float, a: float, p: float, r: float) -> tuple[float, float]:
    """Return ``(t0, g(t0))`` for the unique positive critical point of g."""
    ap = a * p
    if not ap > 2:
        raise RegimeError(f"a * p = {ap:g} <= 2: g has no positive maximum")
    t0 = (1.0 / (C2 * a)) ** (1.0 / (ap - 2.0))
    return t0, (0.5 - 1.0 / ap) * t0**2 - C1 / (1.0 - r)


def singular_bound_constant(r: float, volume: float, rho: float) -> float:
    """Cs = 2^(1-r) |Omega| + 2^(1-r) |Omega|^((1+r)/2) rho^((1-r)/2)."""
    k = 2.0 ** (1.0 - r)
    return k * volume + k * volume ** ((1.0 + r) / 2.0) * rho ** ((1.0 - r) / 2.0)


def geometry_report(params: Params, C: float, lambda1: float) -> GeometryReport:
    r, p, rho = params.r, params.p, params.rho
    vol = params.domain.volume
    a = gn_exponent(params.dim, p)
    C1 = rho ** ((1.0 - r) / 2.0) * vol ** ((1.0 + r) / 2.0) + vol
    C2 = C**p * rho ** ((1.0 - a) * p / 2.0)
    t0, g_t0 = g_critical(C1, C2, a, p, r)
    tau = t0
    Cp = C**p * tau ** (a * p) * rho ** ((1.0 - a) * p / 2.0)
    Cs = singular_bound_constant(r, vol, rho)
    return GeometryReport(
        a=a,
        C=C,
        C1=C1,
        C2=C2,
        t0=t0,
        g_t0=g_t0,
        tau=tau,
        rho_admissible=bool(g_t0 > 0),
        M=(Cs + Cp) / rho,
        Cp=Cp,
        Cs=Cs,
        lambda1=lambda1,
    )


def g_t0_at(params: Params, C: float, rho: float) -> float:
    return geometry_report(params.replace(rho=rho), C, 0.0).g_t0


def _bisect_threshold(ok, lo: float, hi: float, rtol: float) -> float:
    """Largest value (from below) where the monotone predicate ``ok`` still holds."""
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _threshold(ok, start: float, rtol: float) -> float:
    lo = start
    while not ok(lo):
        lo *= 0.5
        if lo < 1e-300:
            return 0.0
    hi = 2.0 * lo
    while ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return math.inf
    return _bisect_threshold(ok, lo, hi, rtol)


def find_rho0(params: Params, C: float, lambda1: float = 0.0, rtol: float = 1e-6) -> float:
    """Largest mass with g(t0) > 0, to relative tolerance ``rtol`` (bracketed from below).

    g(t0) decreases in rho, so every smaller mass is admissible too.  Returns
    0 when no positive mass passes, which points at a bad estimate of C.
    """
    gn_exponent(params.dim, params.p)
    if params.dim * (0.5 - 1.0 / params.p) * params.p <= 2:
        raise RegimeError("a * p <= 2: no admissible mass threshold")
    return _threshold(lambda rho: g_t0_at(params, C, rho) > 0, params.rho, rtol)


def witness_rho_threshold(
    params: Params, grid: Grid, C: float, phi: FieldLike, rtol: float = 1e-6
) -> float:
    """Largest mass at which the scaled profile ``c * phi`` is a valid witness.

    Two conditions: ``|grad(c phi)|_2 <= tau(rho)``, and the eps-independent
    bound c^2 |grad phi|^2 / 2 < c^(1-r) int phi^(1-r) / (1-r), which forces
    negative energy for every eps >= 0.
    """
    r = params.r
    vals = values_of(grid, phi)
    m = mass(grid, vals)
    dphi = grad_norm_sq(grid, vals)
    sing = lp_integral(grid, vals, 1.0 - r)
    # c^(1+r) < 2 int phi^(1-r) / ((1-r) |grad phi|^2)
    c_star = (2.0 * sing / ((1.0 - r) * dphi)) ** (1.0 / (1.0 + r))
    rho_energy = c_star**2 * m

    def inside(rho):
        tau = geometry_report(params.replace(rho=rho), C, 0.0).tau
        return math.sqrt(rho / m * dphi) <= tau

    rho_ball = _threshold(inside, params.rho, rtol)
    return min(rho_energy, rho_ball)


def rho0_estimate(params: Params, grid: Grid, C: float, phi: FieldLike) -> float:
    """Conservative admissible mass: the smaller of the two thresholds."""
    return min(find_rho0(params, C), witness_rho_threshold(params, grid, C, phi))
