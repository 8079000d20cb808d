"""Continuation eps -> 0+ with warm starts and monitors for the uniform bounds."""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Field, Grid, Params, l2_norm, lp_integral
from .eigen import EigenPair, first_eigenpair
from .energy import DEFAULT_U_FLOOR, residual_norm
from .errors import GeometryInadmissible, NormsolError
from .geometry import GeometryReport, estimate_gn_constant, geometry_report
from .minimizer import (
    LambdaWindow,
    MinimizeOptions,
    eigenfunction_pairing_check,
    lambda_window_check,
    minimize_j_eps,
    negative_energy_witness,
)

__all__ = [
    "ContinuationRecord",
    "ContinuationLog",
    "SolveResult",
    "SweepEntry",
    "eps_schedule",
    "prepare_geometry",
    "continue_to_limit",
    "sweep_rho",
    "CAUCHY_FLOOR",
]

logger = logging.getLogger(__name__)

CAUCHY_FLOOR = 1e-6
BETA_FACTOR = 0.5
LINF_FACTOR = 2.0
BOOLEAN_CHECKS = (
    "lambda_window",
    "positivity",
    "beta_floor",
    "linf_bound",
    "cauchy_trend",
    "residual_eps0_ok",
)


def eps_schedule(eps0: float, factor: float, eps_min: float) -> list[float]:
    """Geometric sequence eps0 * factor^k, k >= 0, kept while >= eps_min."""
    if not 0 < factor < 1:
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    if eps0 > 1:
        raise ValueError(f"eps0 must be <= 1, got {eps0}")
    if not 0 < eps_min <= eps0:
        raise ValueError("need 0 < eps_min <= eps0")
    out = []
    k = 0
    cutoff = eps_min * (1.0 - 1e-12)
    while True:
        e = eps0 * factor**k
        if e < cutoff:
            break
        out.append(e)
        k += 1
    return out


@dataclass
class ContinuationRecord:
    eps: float
    lam: float
    energy: float
    linf: float
    min_interior: float
    singular_mass: float
    cauchy_gap: Optional[float]
    residual: float
    iterations: int
    converged: bool
    stalled: bool
    lambda_window: str
    u: Field = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("u")
        return d


@dataclass
class ContinuationLog:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def beta(self) -> float:
        """Smallest recorded int u^(1-r)."""
        return min(r.singular_mass for r in self.records)

    @property
    def cauchy_gaps(self) -> list:
        return [r.cauchy_gap for r in self.records[1:]]

    def as_dicts(self) -> list:
        return [r.as_dict() for r in self.records]


@dataclass
class SolveResult:
    params: Params
    geometry: GeometryReport
    u: Field
    lam: float
    energy: float
    log: ContinuationLog
    checks: dict
    pairing_defect: float = math.nan
    residual_tol: float = 1e-3

    @property
    def passed(self) -> bool:
        return all(bool(self.checks[k]) for k in BOOLEAN_CHECKS)

    @property
    def failed(self) -> bool:
        """True when the multiplier window or positivity check fails."""
        return not (self.checks["lambda_window"] and self.checks["positivity"])

    def table_row(self) -> dict:
        return {
            "rho": self.params.rho,
            "lambda": self.lam,
            "energy": self.energy,
            "linf": self.u.max_abs(),
            "passed": self.passed,
        }


def cauchy_trend_ok(gaps: Sequence[float], floor: float = CAUCHY_FLOOR) -> bool:
    """Last three gaps nonincreasing, each step allowed to rise only below ``floor``."""
    tail = list(gaps)[-3:]
    return all(b <= a or b < floor for a, b in zip(tail, tail[1:]))


def prepare_geometry(
    params: Params, grid: Grid, seed: int = 0, trial_count: int = 32
) -> tuple[EigenPair, float, GeometryReport]:
    eig = first_eigenpair(grid)
    C = estimate_gn_constant(grid, params, trial_count=trial_count, seed=seed)
    return eig, C, geometry_report(params, C, eig.lambda1)


def continue_to_limit(
    params: Params,
    grid: Grid,
    schedule: Sequence[float],
    opts: MinimizeOptions = MinimizeOptions(),
    *,
    seed: int = 0,
    trial_count: int = 32,
    u_floor: float = DEFAULT_U_FLOOR,
    residual_tol: float = 1e-3,
    callback: Callable[[float, int, np.ndarray, float], None] | None = None,
    prepared: tuple[EigenPair, float, GeometryReport] | None = None,
) -> SolveResult:
    """Solve the regularized problems along ``schedule`` and pass to eps = 0.

    The first problem starts from the negative-energy witness; each later one
    warm-starts from the previous minimizer.  Raises ``GeometryInadmissible``
    before any solve when g(t0) <= 0.  Monitor failures are reported through
    ``SolveResult.checks`` rather than raised.

    ``callback(eps, iteration, values, energy)`` observes every accepted iterate.
    """
    if len(schedule) == 0:
        raise ValueError("empty eps schedule")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    if schedule[0] > 1:
        raise ValueError("eps must not exceed 1")

    eig, C, geo = prepared if prepared is not None else prepare_geometry(
        params, grid, seed, trial_count
    )
    if not geo.rho_admissible:
        raise GeometryInadmissible(
            f"g(t0) = {geo.g_t0:.6g} <= 0 at rho = {params.rho}: mass too large", geo
        )
    opts = dataclasses.replace(opts, tau=geo.tau)
    u = negative_energy_witness(params, grid, geo.tau)

    log = ContinuationLog()
    prev = None
    for eps in schedule:
        pe = params.replace(eps=eps)
        cb = None
        if callback is not None:
            cb = lambda it, vals, en, _e=eps: callback(_e, it, vals, en)
        res = minimize_j_eps(pe, grid, u, opts, callback=cb)
        if res.stalled:
            logger.warning("line search stalled at eps=%g (pg norm %.3e)", eps, res.final_pg_norm)
        u = res.u
        gap = None if prev is None else l2_norm(grid, u.values - prev.values)
        log.records.append(
            ContinuationRecord(
                eps=eps,
                lam=res.lam,
                energy=res.energy,
                linf=u.max_abs(),
                min_interior=res.min_interior,
                singular_mass=lp_integral(grid, u, 1.0 - params.r),
                cauchy_gap=gap,
                residual=res.final_pg_norm,
                iterations=res.iterations,
                converged=res.converged,
                stalled=res.stalled,
                lambda_window=lambda_window_check(res.lam, eig.lambda1, geo.M).value,
                u=u,
            )
        )
        prev = u

    first, last = log.records[0], log.records[-1]
    residual_eps0 = residual_norm(params.replace(eps=0.0), grid, u, last.lam, u_floor=u_floor)
    checks = {
        "lambda_window": all(r.lambda_window == LambdaWindow.ok.value for r in log.records),
        "positivity": bool(u.min_interior() > 0),
        "beta_floor": log.beta >= BETA_FACTOR * first.singular_mass,
        "linf_bound": max(r.linf for r in log.records) <= LINF_FACTOR * first.linf,
        "cauchy_trend": cauchy_trend_ok(log.cauchy_gaps),
        "residual_eps0": residual_eps0,
        "residual_eps0_ok": residual_eps0 <= residual_tol,
        "beta": log.beta,
        "converged_all": all(r.converged for r in log.records),
    }
    defect = eigenfunction_pairing_check(params.replace(eps=last.eps), grid, u, last.lam, eig)
    return SolveResult(
        params=params,
        geometry=geo,
        u=u,
        lam=last.lam,
        energy=last.energy,
        log=log,
        checks=checks,
        pairing_defect=defect,
        residual_tol=residual_tol,
    )


@dataclass
class SweepEntry:
    rho: float
    result: Optional[SolveResult]
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.result is not None and self.result.passed


def sweep_rho(
    params: Params,
    grid: Grid,
    rho_list: Sequence[float],
    schedule: Sequence[float],
    opts: MinimizeOptions = MinimizeOptions(),
    threads: int = 1,
    **kwargs,
) -> list[SweepEntry]:
    """Independent continuations for every mass in ``rho_list``, in the given order.

    A failure at one mass is recorded in its entry and the sweep goes on.
    """
    rho_list = list(rho_list)
    if not rho_list:
        raise ValueError("rho_list is empty")
    if any(not rho > 0 for rho in rho_list):
        raise ValueError("masses must be positive")

    def run(rho):
        try:
            res = continue_to_limit(params.replace(rho=rho), grid, schedule, opts, **kwargs)
            return SweepEntry(rho, res)
        except NormsolError as exc:
            return SweepEntry(rho, None, f"{type(exc).__name__}: {exc}")

    if threads <= 1:
        return [run(rho) for rho in rho_list]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, rho_list))
