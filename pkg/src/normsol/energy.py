"""The regularized energy, its L2 gradient and the strong-form residual."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Field,
    FieldLike,
    Grid,
    Params,
    _neg_laplacian_values,
    grad_norm_sq,
    values_of,
)
from .errors import DomainError, SingularityError

__all__ = [
    "EnergyBreakdown",
    "j_eps",
    "j_eps_gradient",
    "energy_difference",
    "residual_field",
    "residual_norm",
    "DEFAULT_U_FLOOR",
]

DEFAULT_U_FLOOR = 1e-3


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float
    singular: float
    power: float
    total: float

    def as_dict(self) -> dict:
        return {
            "dirichlet": self.dirichlet,
            "singular": self.singular,
            "power": self.power,
            "total": self.total,
        }


def _nonnegative(grid: Grid, u: FieldLike) -> np.ndarray:
    vals = values_of(grid, u)
    if np.any(vals < 0):
        raise DomainError("the energy is only defined for u >= 0")
    return vals


def _eps_of(params: Params, eps: float | None) -> float:
    return params.eps if eps is None else float(eps)


def j_eps(params: Params, grid: Grid, u: FieldLike, eps: float | None = None) -> EnergyBreakdown:
    """Evaluate 1/2 |grad u|^2 - (u + eps)^(1-r) / (1-r) - u^p / p by quadrature.

    ``eps`` overrides ``params.eps``.  eps = 0 is allowed here since the
    singular power 1 - r is positive.
    """
    vals = _nonnegative(grid, u)
    eps = _eps_of(params, eps)
    r, p = params.r, params.p
    w = grid.quad_weights
    dirichlet = 0.5 * grad_norm_sq(grid, vals)
    singular = float(np.dot(w, (vals + eps) ** (1.0 - r))) / (1.0 - r)
    power = float(np.dot(w, vals**p)) / p
    return EnergyBreakdown(dirichlet, singular, power, dirichlet - singular - power)


def _check_differentiable(grid: Grid, vals: np.ndarray, eps: float) -> None:
    if eps == 0.0 and np.any(vals[grid.interior_mask] <= 0.0):
        raise SingularityError("eps = 0 needs u > 0 on every interior node")


def source_term(params: Params, vals: np.ndarray, eps: float) -> np.ndarray:
    """(u + eps)^-r + u^(p-1), nodewise."""
    with np.errstate(divide="ignore"):
        return (vals + eps) ** (-params.r) + vals ** (params.p - 1.0)


def _gradient_values(params: Params, grid: Grid, vals: np.ndarray, eps: float) -> np.ndarray:
    g = _neg_laplacian_values(grid, vals) - source_term(params, vals, eps)
    g[~grid.interior_mask] = 0.0
    return g


def j_eps_gradient(params: Params, grid: Grid, u: FieldLike, eps: float | None = None) -> Field:
    """L2 (quadrature) gradient: -Delta u - (u + eps)^-r - u^(p-1), zero on the boundary.

    This is the exact gradient of the discrete ``j_eps`` with respect to the
    weighted inner product, so <gradient, v>_quad equals the directional
    derivative along any ``v`` vanishing on the boundary.
    """
    vals = _nonnegative(grid, u)
    eps = _eps_of(params, eps)
    _check_differentiable(grid, vals, eps)
    return Field(_gradient_values(params, grid, vals, eps), grid)


def _power_increment(base: np.ndarray, delta: np.ndarray, q: float) -> np.ndarray:
    """(base + delta)^q - base^q without cancellation where base > 0."""
    out = np.empty_like(base)
    pos = base > 0
    b = base[pos]
    out[pos] = b**q * np.expm1(q * np.log1p(delta[pos] / b))
    out[~pos] = (base[~pos] + delta[~pos]) ** q - base[~pos] ** q
    return out


def energy_difference(
    params: Params, grid: Grid, u: FieldLike, v: FieldLike, eps: float | None = None
) -> float:
    """J(v) - J(u) evaluated term by term from v - u.

    Subtracting two totals loses everything below ~1e-16 |J|; near a critical
    point the true decrease is far smaller than that, so line searches use
    this instead.
    """
    a = _nonnegative(grid, u)
    b = _nonnegative(grid, v)
    eps = _eps_of(params, eps)
    r, p = params.r, params.p
    d = b - a
    dd = np.diff(d)
    da = np.diff(a)
    fw = grid.face_weights / grid.h
    dirichlet = float(np.dot(fw, dd * (da + 0.5 * dd)))
    w = grid.quad_weights
    singular = float(np.dot(w, _power_increment(a + eps, d, 1.0 - r))) / (1.0 - r)
    power = float(np.dot(w, _power_increment(a, d, p))) / p
    return dirichlet - singular - power


def residual_field(
    params: Params, grid: Grid, u: FieldLike, lam: float, eps: float | None = None
) -> np.ndarray:
    """-Delta u + lam u - (u + eps)^-r - u^(p-1) on interior nodes, zero elsewhere."""
    vals = _nonnegative(grid, u)
    eps = _eps_of(params, eps)
    _check_differentiable(grid, vals, eps)
    res = _gradient_values(params, grid, vals, eps) + lam * vals
    res[~grid.interior_mask] = 0.0
    return res


def residual_norm(
    params: Params,
    grid: Grid,
    u: FieldLike,
    lam: float,
    eps: float | None = None,
    u_floor: float = DEFAULT_U_FLOOR,
) -> float:
    """Quadrature L2 norm of the strong-form residual over interior nodes.

    For eps = 0 only the nodes with u > ``u_floor`` count: the equation is
    only claimed where u is positive, and next to the boundary the discrete
    u^-r magnifies truncation error.
    """
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    vals = _nonnegative(grid, u)
    eps = _eps_of(params, eps)
    mask = grid.interior_mask.copy()
    if eps == 0.0:
        mask &= vals > u_floor
        safe = np.where(mask, vals, 1.0)
        res = _neg_laplacian_values(grid, vals) + lam * vals - source_term(params, safe, 0.0)
    else:
        res = residual_field(params, grid, vals, lam, eps)
    w = np.where(mask, grid.quad_weights, 0.0)
    return math.sqrt(float(np.dot(w, res * res)))
