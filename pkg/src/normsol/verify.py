"""Bound-by-bound numerical verification with a structured pass/fail report.

Each entry records what was measured, the threshold it was held to and the
inequality it stands for, so the report can be re-adjudicated downstream.
Entry ids:

    energy_geometry         energy lower bound g and g(t0) > 0
    negative_energy         J_eps(u0) < 0 for the witness
    regularized_positivity  u_eps > 0 for every eps > 0
    singular_mass_floor     int u_eps^(1-r) >= beta > 0
    multiplier_window       -lambda1 < lambda_k <= M and the phi1 pairing
    cauchy_convergence      Cauchy gaps of u_k in L2
    limit_positivity        u > 0 at the limit
    limit_equation          eps = 0 residual of the limit pair
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .continuation import (
    BETA_FACTOR,
    CAUCHY_FLOOR,
    cauchy_trend_ok,
    continue_to_limit,
    eps_schedule,
)
from .core import FieldLike, Grid, Params, grad_norm_sq, values_of
from .eigen import first_eigenpair
from .energy import DEFAULT_U_FLOOR, j_eps
from .errors import NormsolError
from .geometry import (
    GN_SAFETY,
    _polynomial_bumps,
    g_function,
    geometry_report,
    gn_constant_from_trials,
    gn_exponent,
    gn_trial_functions,
)
from .minimizer import MinimizeOptions, negative_energy_witness, project_constraint

__all__ = ["LemmaEntry", "LemmaReport", "verify_all", "positivity_check", "WITNESS_EPS"]

WITNESS_EPS = (1.0, 0.1, 0.01, 0.001)
PAIRING_FACTOR = 10.0

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class LemmaEntry:
    description: str
    anchor: str
    threshold: dict
    measured: dict = field(default_factory=dict)
    status: str = SKIPPED

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class LemmaReport:
    entries: dict
    settings: dict

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "settings": self.settings,
            "entries": {k: e.as_dict() for k, e in self.entries.items()},
        }


def positivity_check(grid: Grid, u: FieldLike, margin: float = 0.0) -> bool:
    """True iff every interior node exceeds ``margin``."""
    vals = values_of(grid, u)
    return bool(np.all(vals[grid.interior_mask] > margin))


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _entries() -> dict:
    return {
        "energy_geometry": LemmaEntry(
            "internal consistency: J_eps(u) >= g(|grad u|_2) on sampled feasible fields "
            "with C their largest GN quotient, and g(t0) > 0",
            "J_eps(u) >= g(|grad u|_2); g(t0) > 0",
            {"g_t0": "> 0", "min_margin": ">= 0"},
        ),
        "negative_energy": LemmaEntry(
            "the scaled first eigenfunction has negative regularized energy",
            "J_eps(u0) < 0",
            {"max_energy": "< 0"},
        ),
        "regularized_positivity": LemmaEntry(
            "every regularized minimizer is positive on interior nodes",
            "u_eps > 0 in Omega",
            {"min_interior": "> 0"},
        ),
        "singular_mass_floor": LemmaEntry(
            "int u_eps^(1-r) stays bounded away from zero along the continuation",
            "int u_eps^(1-r) >= beta > 0",
            {"beta": f"> 0 and >= {BETA_FACTOR} * first record"},
        ),
        "multiplier_window": LemmaEntry(
            "every multiplier lies in (-lambda1, M]; the phi1-tested identity holds",
            "-lambda1 < lambda_k <= M",
            {"pairing_defect": f"<= {PAIRING_FACTOR} * solver tolerance"},
        ),
        "cauchy_convergence": LemmaEntry(
            "L2 gaps between consecutive minimizers shrink",
            "u_k -> u strongly in L^q",
            {"last_three_gaps": f"nonincreasing or < {CAUCHY_FLOOR}"},
        ),
        "limit_positivity": LemmaEntry(
            "the limit field is positive on interior nodes",
            "u > 0 in Omega",
            {"min_interior": "> 0"},
        ),
        "limit_equation": LemmaEntry(
            "the limit pair solves the unregularized equation where u > u_floor",
            "-Delta u + lambda u = u^-r + u^(p-1)",
            {"residual_eps0": "<= residual_tol"},
        ),
    }


def verify_all(
    params: Params,
    grid: Grid,
    seed: int = 0,
    schedule: Optional[Sequence[float]] = None,
    opts: MinimizeOptions = MinimizeOptions(),
    n_random: int = 50,
    trial_count: int = 32,
    u_floor: float = DEFAULT_U_FLOOR,
    residual_tol: float = 1e-3,
) -> LemmaReport:
    """Run every check and collect the results; failures become entries, never exceptions.

    When g(t0) <= 0 the geometry entry fails and everything that needs a
    solve is left as skipped.
    """
    if schedule is None:
        schedule = eps_schedule(1.0, 0.5, 1e-8)
    entries = _entries()
    settings = {
        "rho": params.rho,
        "r": params.r,
        "p": params.p,
        "dim": params.dim,
        "domain": params.domain.kind,
        "n": grid.size - 2,
        "seed": seed,
        "n_random": n_random,
        "schedule": list(schedule),
        "u_floor": u_floor,
        "residual_tol": residual_tol,
    }

    eig = first_eigenpair(grid)
    a = gn_exponent(params.dim, params.p)
    samples = [project_constraint(grid, f, params.rho) for f in gn_trial_functions(grid, n_random, seed + 1)]
    trials = [eig.phi1, *_polynomial_bumps(grid), *gn_trial_functions(grid, trial_count, seed), *samples]
    C = gn_constant_from_trials(grid, params.p, a, trials, GN_SAFETY)
    geo = geometry_report(params, C, eig.lambda1)

    margins = []
    in_ball = 0
    for u in samples:
        t = math.sqrt(grad_norm_sq(grid, u))
        in_ball += t <= geo.tau
        bound = float(g_function(t, geo.C1, geo.C2, a, params.p, params.r))
        for eps in WITNESS_EPS:
            margins.append(j_eps(params, grid, u, eps=eps).total - bound)
    e = entries["energy_geometry"]
    e.measured = {
        "C": C,
        "a": a,
        "t0": geo.t0,
        "tau": geo.tau,
        "g_t0": geo.g_t0,
        "min_margin": min(margins),
        "samples": len(samples),
        "samples_in_ball": int(in_ball),
    }
    e.status = _status(geo.g_t0 > 0 and min(margins) >= 0)
    if not geo.g_t0 > 0:
        return LemmaReport(entries, settings)

    try:
        u0 = negative_energy_witness(params, grid, geo.tau)
    except NormsolError as exc:
        entries["negative_energy"].measured = {"error": str(exc)}
        entries["negative_energy"].status = FAIL
        return LemmaReport(entries, settings)
    energies = {repr(eps): j_eps(params, grid, u0, eps=eps).total for eps in WITNESS_EPS}
    e = entries["negative_energy"]
    e.measured = {"energies": energies, "max_energy": max(energies.values())}
    e.status = _status(max(energies.values()) < 0)

    try:
        res = continue_to_limit(
            params,
            grid,
            schedule,
            opts,
            u_floor=u_floor,
            residual_tol=residual_tol,
            prepared=(eig, C, geo),
        )
    except NormsolError as exc:
        for key in list(entries)[2:]:
            entries[key].measured = {"error": str(exc)}
            entries[key].status = FAIL
        return LemmaReport(entries, settings)

    recs = res.log.records
    mins = [r.min_interior for r in recs]
    e = entries["regularized_positivity"]
    e.measured = {"min_interior": min(mins), "per_eps": mins}
    e.status = _status(min(mins) > 0)

    beta = res.log.beta
    e = entries["singular_mass_floor"]
    e.measured = {"beta": beta, "first": recs[0].singular_mass}
    e.status = _status(beta > 0 and beta >= BETA_FACTOR * recs[0].singular_mass)

    tol = opts.tolerance(recs[-1].energy)
    lams = [r.lam for r in recs]
    e = entries["multiplier_window"]
    e.measured = {
        "lambda_min": min(lams),
        "lambda_max": max(lams),
        "lambda1": eig.lambda1,
        "M": geo.M,
        "pairing_defect": res.pairing_defect,
        "solver_tolerance": tol,
    }
    e.status = _status(
        res.checks["lambda_window"] and abs(res.pairing_defect) <= PAIRING_FACTOR * tol
    )

    gaps = res.log.cauchy_gaps
    e = entries["cauchy_convergence"]
    e.measured = {"gaps": gaps, "last_three": gaps[-3:]}
    e.status = _status(cauchy_trend_ok(gaps))

    e = entries["limit_positivity"]
    e.measured = {"min_interior": res.u.min_interior()}
    e.status = _status(positivity_check(grid, res.u))

    e = entries["limit_equation"]
    e.measured = {"residual_eps0": res.checks["residual_eps0"], "lambda": res.lam, "eps_final": recs[-1].eps}
    e.status = _status(bool(res.checks["residual_eps0_ok"]))
    return LemmaReport(entries, settings)
