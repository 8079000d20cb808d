"""Projected gradient minimization of J_eps on {u >= 0, int u^2 = rho, |grad u|_2 <= tau}."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Field, FieldLike, Grid, Params, grad_norm_sq, mass, quad_inner, values_of
from .eigen import EigenPair, first_eigenpair
from .energy import _gradient_values, energy_difference, j_eps
from .errors import CannotNormalize, LineSearchStall, SingularityError, WitnessFailure

__all__ = [
    "MinimizeOptions",
    "MinimizeResult",
    "project_constraint",
    "negative_energy_witness",
    "minimize_j_eps",
    "extract_lambda",
    "LambdaWindow",
    "lambda_window_check",
    "pairing_integrals",
    "eigenfunction_pairing_check",
]

Callback = Callable[[int, np.ndarray, float], None]


@dataclass(frozen=True)
class MinimizeOptions:
    """Line-search and stopping controls.

    ``grad_tol=None`` means 1e-8 * (1 + |J|), re-evaluated at every iterate.
    """

    max_iters: int = 50000
    grad_tol: Optional[float] = None
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    step_init: float = 1.0
    tau: float = math.inf
    min_step: float = 1e-14

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.armijo_c < 1 or not 0 < self.armijo_shrink < 1:
            raise ValueError("armijo_c and armijo_shrink must lie in (0, 1)")
        if not self.step_init > 0 or not self.tau > 0:
            raise ValueError("step_init and tau must be positive")

    def tolerance(self, energy: float) -> float:
        if self.grad_tol is not None:
            return self.grad_tol
        return 1e-8 * (1.0 + abs(energy))


@dataclass
class MinimizeResult:
    u: Field
    energy: float
    lam: float
    iterations: int
    final_pg_norm: float
    tau_active: bool
    min_interior: float
    converged: bool
    stalled: bool = False
    energy_history: list = field(default_factory=list)

    @property
    def lambda_(self) -> float:
        return self.lam


def project_constraint(grid: Grid, u: FieldLike, rho: float) -> Field:
    """Clip negative values, then rescale to mass ``rho``.

    This is a feasibility-restoring retraction, not the metric projection
    onto the nonnegative part of the sphere.  A field already at mass ``rho``
    (to within a couple of ulps) is returned unscaled, so the map is
    idempotent bit for bit.
    """
    vals = np.maximum(values_of(grid, u), 0.0)
    vals[~grid.interior_mask] = 0.0
    m = mass(grid, vals)
    if not m > 0:
        raise CannotNormalize("the positive part of u vanishes; cannot rescale to mass rho")
    scale = math.sqrt(rho / m)
    if abs(scale - 1.0) > 4 * np.finfo(float).eps:
        vals = vals * scale
    return Field(vals, grid)


def extract_lambda(params: Params, grid: Grid, u: FieldLike, eps: float | None = None) -> float:
    """Multiplier from testing the equation with u itself.

    lambda = (int (u+eps)^-r u + int u^p - |grad u|^2) / int u^2
    """
    vals = values_of(grid, u)
    eps = params.eps if eps is None else eps
    m = mass(grid, vals)
    if m == 0:
        raise CannotNormalize("mass(u) = 0: multiplier undefined")
    if eps == 0 and np.any(vals[grid.interior_mask] <= 0):
        raise SingularityError("eps = 0 needs u > 0 on interior nodes")
    pos = vals > 0
    sing = np.zeros_like(vals)
    sing[pos] = (vals[pos] + eps) ** (-params.r) * vals[pos]
    w = grid.quad_weights
    num = float(np.dot(w, sing)) + float(np.dot(w, vals**params.p)) - grad_norm_sq(grid, vals)
    return num / m


def _lambda_values(params, grid, vals, eps, m):
    # same formula as extract_lambda without re-validation
    pos = vals > 0
    sing = np.zeros_like(vals)
    sing[pos] = (vals[pos] + eps) ** (-params.r) * vals[pos]
    w = grid.quad_weights
    return (float(np.dot(w, sing)) + float(np.dot(w, vals**params.p)) - grad_norm_sq(grid, vals)) / m


def _bump(grid: Grid, width: float) -> np.ndarray:
    x = np.asarray(grid.nodes)
    length = grid.domain.length_or_radius
    centre = 0.5 * length if grid.kind == "interval" else 0.0
    z = (x - centre) / width
    return np.where(np.abs(z) < 1, (1 - z * z) ** 2, 0.0)


def negative_energy_witness(
    params: Params,
    grid: Grid,
    tau: float | None = None,
    profile: str = "eigen",
    phi: FieldLike | None = None,
) -> Field:
    """Feasible start ``c * phi`` with c = sqrt(rho / int phi^2).

    ``profile="eigen"`` uses the first eigenfunction, which already has the
    smallest possible Rayleigh quotient; ``profile="bump"`` starts from a
    narrow compactly supported polynomial bump and widens it until the
    gradient bound |grad u0|_2 <= tau holds.  An explicit ``phi`` overrides
    both.  When ``tau`` is None it is computed from a fresh geometry report.
    """
    if tau is None:
        from .geometry import estimate_gn_constant, geometry_report

        C = estimate_gn_constant(grid, params)
        tau = geometry_report(params, C, 0.0).tau

    if phi is not None:
        candidates = [np.asarray(values_of(grid, phi), dtype=float)]
    elif profile == "eigen":
        candidates = [first_eigenpair(grid).phi1.values]
    elif profile == "bump":
        length = grid.domain.length_or_radius
        half = 0.5 * length if grid.kind == "interval" else length
        widths = [half * f for f in (0.125, 0.25, 0.5, 1.0)]
        candidates = [_bump(grid, wd) for wd in widths]
    else:
        raise ValueError(f"unknown witness profile {profile!r}")

    for cand in candidates:
        cand = np.maximum(cand, 0.0)
        cand[~grid.interior_mask] = 0.0
        m = mass(grid, cand)
        if m == 0:
            continue
        u0 = project_constraint(grid, math.sqrt(params.rho / m) * cand, params.rho)
        if math.sqrt(grad_norm_sq(grid, u0)) <= tau:
            return u0
    raise WitnessFailure(
        f"no witness profile satisfies |grad u0| <= tau = {tau:.6g} at rho = {params.rho}; "
        "rho is too large"
    )


def _tangent_direction(grid, solve, g, vals):
    """Preconditioned gradient made L2-orthogonal to u."""
    free = grid.free
    w = grid.quad_weights[free]
    gf, uf = g[free], vals[free]
    d0 = solve(gf)
    z = solve(uf)
    d = d0 - (np.dot(w, d0 * uf) / np.dot(w, z * uf)) * z
    out = np.zeros_like(vals)
    out[free] = d
    return out


def minimize_j_eps(
    params: Params,
    grid: Grid,
    init: FieldLike,
    opts: MinimizeOptions = MinimizeOptions(),
    callback: Callback | None = None,
    on_stall: str = "flag",
) -> MinimizeResult:
    """Minimize J_eps over the discrete trust region K starting from ``init``.

    Each step moves along the tangential part of a preconditioned gradient
    (the operator -Delta + lambda^+ + r (u+eps)^(-r-1) + 1, solved by banded
    Cholesky), retracts with ``project_constraint`` and backtracks until the
    Armijo condition holds for the merit J_eps + lam/2 (mass - rho) along the
    retraction, with lam frozen at the current multiplier.  On the sphere the
    merit equals J_eps; the mass term only absorbs the rounding left by the
    rescale, which otherwise swamps the decrease near a critical point.
    ``energy_history`` accumulates these merit decrements from J_eps(init).  Trial
    points outside the gradient ball are rejected like failed Armijo steps.
    The run stops once the L2 norm of the tangential gradient, which equals
    the residual at the extracted multiplier, drops below the tolerance.

    ``callback(iteration, values, energy)`` sees every accepted iterate.  On a
    line-search stall the best iterate is returned with ``stalled=True``, or
    ``LineSearchStall`` is raised when ``on_stall="raise"``.
    """
    eps = params.eps
    if not eps > 0:
        raise ValueError("minimize_j_eps needs eps > 0")
    rho, r = params.rho, params.r
    free = grid.free
    w_free = grid.quad_weights[free]

    vals = project_constraint(grid, init, rho).values.copy()
    if math.sqrt(grad_norm_sq(grid, vals)) > opts.tau:
        raise WitnessFailure("initial field lies outside the gradient ball")

    energy = j_eps(params, grid, vals).total
    history = [energy]
    tau_active = math.sqrt(grad_norm_sq(grid, vals)) >= 0.99 * opts.tau
    if callback is not None:
        callback(0, vals.copy(), energy)

    converged = stalled = False
    it = 0
    pg_norm = math.inf
    lam = math.nan
    while True:
        m = mass(grid, vals)
        g = _gradient_values(params, grid, vals, eps)
        lam = _lambda_values(params, grid, vals, eps, m)
        pg = g + lam * vals
        pg[~grid.interior_mask] = 0.0
        pg_norm = math.sqrt(float(np.dot(w_free, pg[free] ** 2)))
        if pg_norm <= opts.tolerance(energy):
            converged = True
            break
        if it >= opts.max_iters:
            break

        curv = r * (vals[free] + eps) ** (-r - 1.0)
        solve = grid.solver(max(lam, 0.0) + 1.0, curv)
        # pg, not g: g is dominated by its normal part -lam u, which cancels
        # in exact arithmetic but not in floating point
        d = _tangent_direction(grid, solve, pg, vals)
        slope = quad_inner(grid, pg, d)
        if not slope > 0:
            stalled = True
            break

        step = opts.step_init
        accepted = False
        while step >= opts.min_step:
            try:
                trial = project_constraint(grid, vals - step * d, rho).values
            except CannotNormalize:
                trial = None
            if trial is not None and math.sqrt(grad_norm_sq(grid, trial)) <= opts.tau:
                de = energy_difference(params, grid, vals, trial)
                # rounding leaves the rescaled mass off rho by ~1 ulp, which
                # moves J by ~lam * ulp; the Lagrangian merit cancels that
                dm = float(np.dot(grid.quad_weights, (trial - vals) * (trial + vals)))
                de = de + 0.5 * lam * dm
                if de <= -opts.armijo_c * step * slope:
                    accepted = True
                    break
            step *= opts.armijo_shrink
        if not accepted:
            stalled = True
            break

        it += 1
        vals = trial
        energy = energy + de
        history.append(energy)
        if math.sqrt(grad_norm_sq(grid, vals)) >= 0.99 * opts.tau:
            tau_active = True
        if callback is not None:
            callback(it, vals.copy(), energy)

    u = Field(vals, grid)
    result = MinimizeResult(
        u=u,
        energy=j_eps(params, grid, u).total,
        lam=extract_lambda(params, grid, u),
        iterations=it,
        final_pg_norm=pg_norm,
        tau_active=tau_active,
        min_interior=u.min_interior(),
        converged=converged,
        stalled=stalled,
        energy_history=history,
    )
    if stalled and on_stall == "raise":
        raise LineSearchStall(
            f"line search stalled after {it} iterations (pg norm {pg_norm:.3e})", result
        )
    return result


class LambdaWindow(str, enum.Enum):
    ok = "ok"
    below_lower = "below_lower"
    above_upper = "above_upper"


def lambda_window_check(lam: float, lambda1: float, M: float) -> LambdaWindow:
    """Classify lam against the window -lambda1 < lam <= M."""
    if not lam > -lambda1:
        return LambdaWindow.below_lower
    if not lam <= M:
        return LambdaWindow.above_upper
    return LambdaWindow.ok


def pairing_integrals(
    params: Params, grid: Grid, u: FieldLike, eigenpair: EigenPair, eps: float | None = None
) -> tuple[float, float, float]:
    """(int u phi1, int (u+eps)^-r phi1, int u^(p-1) phi1)."""
    vals = values_of(grid, u)
    eps = params.eps if eps is None else eps
    phi = values_of(grid, eigenpair.phi1)
    w = grid.quad_weights
    pos = phi != 0
    if eps == 0 and np.any(vals[pos] <= 0):
        raise SingularityError("eps = 0 needs u > 0 where phi1 > 0")
    srcw = np.zeros_like(vals)
    srcw[pos] = (vals[pos] + eps) ** (-params.r) * phi[pos]
    return (
        float(np.dot(w, vals * phi)),
        float(np.dot(w, srcw)),
        float(np.dot(w, vals ** (params.p - 1.0) * phi)),
    )


def eigenfunction_pairing_check(
    params: Params,
    grid: Grid,
    u: FieldLike,
    lam: float,
    eigenpair: EigenPair,
    eps: float | None = None,
) -> float:
    """Defect (lambda1 + lam) int u phi1 - int (u+eps)^-r phi1 - int u^(p-1) phi1.

    Zero for an exact solution.  Both subtracted integrals are positive, so a
    small defect also certifies lam > -lambda1.
    """
    uphi, sing, powr = pairing_integrals(params, grid, u, eigenpair, eps)
    return (eigenpair.lambda1 + lam) * uphi - sing - powr
