"""Grids, fields and discrete calculus on an interval or a radially symmetric ball.

The discretization is a vertex-centred finite-volume scheme on a uniform grid.
Each node owns the dual cell between its neighbouring midpoints; quadrature
weights are the exact measures of those cells (for the ball, the volume of a
spherical shell), and fluxes live on the midpoints, weighted by the area of
the sphere through that midpoint.  With that pairing the discrete operator
``-Delta`` is self-adjoint in the quadrature inner product and

    <neg_laplacian(u), v>_quad == <grad u, grad v>_quad

holds exactly for fields vanishing on the Dirichlet boundary.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import DomainError, GridMismatch, InvalidResolution, ParameterError

__all__ = [
    "DomainSpec",
    "Params",
    "Grid",
    "Field",
    "build_grid",
    "neg_laplacian",
    "mass",
    "lp_integral",
    "grad_norm_sq",
    "grad_inner",
    "quad_inner",
    "l2_norm",
    "sphere_area",
]


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim = 1, 4*pi for dim = 3)."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


@dataclass(frozen=True)
class DomainSpec:
    kind: Literal["interval", "radial_ball"] = "radial_ball"
    length_or_radius: float = 1.0
    ball_dimension: int | None = 3

    def __post_init__(self):
        if self.kind not in ("interval", "radial_ball"):
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        if not self.length_or_radius > 0:
            raise ParameterError("length_or_radius must be > 0")
        if self.kind == "radial_ball":
            if self.ball_dimension is None or self.ball_dimension < 2:
                raise ParameterError("radial_ball requires ball_dimension >= 2")
        else:
            object.__setattr__(self, "ball_dimension", None)

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else int(self.ball_dimension)

    @property
    def volume(self) -> float:
        """Lebesgue measure |Omega|."""
        if self.kind == "interval":
            return float(self.length_or_radius)
        n = self.dim
        return sphere_area(n) * self.length_or_radius**n / n


@dataclass(frozen=True)
class Params:
    """Problem data for -Delta u + lambda u = u^-r + u^(p-1), int u^2 = rho.

    ``dim`` must agree with the domain (1 for an interval, ``ball_dimension``
    for a ball).  With ``strict_paper_regime`` the mass-supercritical,
    Sobolev-subcritical window 2 + 4/N < p < 2N/(N-2) with N >= 3 is enforced.
    """

    dim: int = 3
    r: float = 0.5
    p: float = 4.0
    rho: float = 0.01
    eps: float = 1.0
    domain: DomainSpec = field(default_factory=DomainSpec)
    strict_paper_regime: bool = False

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ParameterError(f"r must satisfy 0 < r < 1, got r = {self.r}")
        if not self.p > 2.0:
            raise ParameterError(f"p must satisfy p > 2, got p = {self.p}")
        if not self.rho > 0.0:
            raise ParameterError(f"rho must be > 0, got rho = {self.rho}")
        if not self.eps >= 0.0:
            raise ParameterError(f"eps must be >= 0, got eps = {self.eps}")
        if self.dim < 1:
            raise ParameterError("dim must be >= 1")
        if self.dim != self.domain.dim:
            raise ParameterError(
                f"dim = {self.dim} does not match the {self.domain.kind} domain "
                f"dimension {self.domain.dim}"
            )
        if self.strict_paper_regime:
            n = self.dim
            if n < 3:
                raise ParameterError("strict regime requires N >= 3")
            lo, hi = 2.0 + 4.0 / n, 2.0 * n / (n - 2.0)
            if not lo < self.p < hi:
                raise ParameterError(
                    f"strict regime requires {lo:g} < p < {hi:g}, got p = {self.p}"
                )

    def replace(self, **changes) -> "Params":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid with dual-cell quadrature.

    ``face_weights[j]`` is the measure of the interface between node j and
    node j+1 (1 on an interval, the sphere area at the midpoint on a ball).
    """

    domain: DomainSpec
    nodes: np.ndarray
    h: float
    quad_weights: np.ndarray
    face_weights: np.ndarray
    interior_mask: np.ndarray

    @property
    def kind(self) -> str:
        return self.domain.kind

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def volume(self) -> float:
        return self.domain.volume

    @cached_property
    def free(self) -> np.ndarray:
        """Indices of the non-boundary nodes (the unknowns)."""
        return np.flatnonzero(self.interior_mask)

    @cached_property
    def stiffness_banded(self) -> np.ndarray:
        """Upper banded form of the SPD stiffness matrix on the free nodes."""
        a = self.face_weights / self.h
        free = self.free
        m = free.size
        ab = np.zeros((2, m))
        left = np.where(free > 0, a[np.maximum(free - 1, 0)], 0.0)
        right = a[free]
        ab[1] = left + right
        ab[0, 1:] = -a[free[1:] - 1]
        return ab

    def solver(self, shift_weight: float = 0.0, diag: np.ndarray | None = None):
        """Factor ``K + diag(w * (shift + diag))`` on the free nodes.

        Returns a callable solving ``(A + shift + diag) x = y`` for interior
        values ``y``; that is the weighted operator, not the raw stiffness.
        """
        w = self.quad_weights[self.free]
        ab = self.stiffness_banded.copy()
        extra = shift_weight if diag is None else shift_weight + diag
        ab[1] = ab[1] + w * extra
        chol = cholesky_banded(ab, lower=False)

        def solve(y):
            return cho_solve_banded((chol, False), w * y)

        return solve


def build_grid(domain: DomainSpec, n: int) -> Grid:
    """Grid with ``n + 1`` equal cells on ``domain``.

    On an interval both endpoints are Dirichlet nodes.  On a ball the centre
    ``s = 0`` is a free symmetry node (zero flux through it) and ``s = R`` is
    the Dirichlet boundary.
    """
    if int(n) != n or n < 2:
        raise InvalidResolution(f"resolution must be an integer >= 2, got {n}")
    n = int(n)
    cells = n + 1
    length = float(domain.length_or_radius)
    h = length / cells
    nodes = np.arange(cells + 1) * h
    nodes[-1] = length
    mids = (np.arange(cells) + 0.5) * h
    edges = np.concatenate(([0.0], mids, [length]))

    mask = np.ones(cells + 1, dtype=bool)
    mask[-1] = False
    if domain.kind == "interval":
        weights = np.diff(edges)
        faces = np.ones(cells)
        mask[0] = False
    else:
        dim = domain.dim
        omega = sphere_area(dim)
        weights = omega / dim * np.diff(edges**dim)
        faces = omega * mids ** (dim - 1)

    for arr in (nodes, weights, faces, mask):
        arr.setflags(write=False)
    return Grid(domain, nodes, h, weights, faces, mask)


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values on a grid with zero Dirichlet data."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise GridMismatch(
                f"field has shape {values.shape}, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        if np.any(values[~self.grid.interior_mask] != 0.0):
            raise DomainError("field must vanish on the Dirichlet boundary")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        """Sample ``func`` on the nodes and zero the boundary."""
        values = np.asarray(func(np.asarray(grid.nodes)), dtype=float).copy()
        values[~grid.interior_mask] = 0.0
        return cls(values, grid)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(np.zeros(grid.size), grid)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def min_interior(self) -> float:
        return float(self.values[self.grid.interior_mask].min())

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())


FieldLike = Union[Field, np.ndarray]


def values_of(grid: Grid, u: FieldLike) -> np.ndarray:
    """Raw nodal values of ``u`` after checking it lives on ``grid``."""
    if isinstance(u, Field):
        if u.grid is not grid:
            if u.grid.size != grid.size or not np.array_equal(u.grid.nodes, grid.nodes):
                raise GridMismatch("field belongs to a different grid")
        return u.values
    arr = np.asarray(u, dtype=float)
    if arr.shape != (grid.size,):
        raise GridMismatch(f"array has shape {arr.shape}, grid has {grid.size} nodes")
    return arr


def _neg_laplacian_values(grid: Grid, u: np.ndarray) -> np.ndarray:
    flux = grid.face_weights * np.diff(u) / grid.h
    out = np.zeros_like(u)
    # node i collects flux[i-1] - flux[i]; the centre of a ball has no inner face
    div = np.empty_like(u)
    div[:-1] = -flux
    div[-1] = 0.0
    div[1:] += flux
    mask = grid.interior_mask
    out[mask] = div[mask] / grid.quad_weights[mask]
    return out


def neg_laplacian(grid: Grid, u: FieldLike) -> Field:
    """Discrete ``-Delta u`` (radial form ``-(u'' + (N-1)/s u')`` on a ball)."""
    return Field(_neg_laplacian_values(grid, values_of(grid, u)), grid)


def quad_inner(grid: Grid, u: FieldLike, v: FieldLike) -> float:
    return float(np.dot(grid.quad_weights, values_of(grid, u) * values_of(grid, v)))


def l2_norm(grid: Grid, u: FieldLike, mask: np.ndarray | None = None) -> float:
    """Quadrature L2 norm, optionally restricted to the nodes where ``mask`` holds."""
    vals = values_of(grid, u)
    w = grid.quad_weights if mask is None else np.where(mask, grid.quad_weights, 0.0)
    return math.sqrt(float(np.dot(w, vals * vals)))


def mass(grid: Grid, u: FieldLike) -> float:
    """Quadrature of u^2."""
    vals = values_of(grid, u)
    return float(np.dot(grid.quad_weights, vals * vals))


def lp_integral(grid: Grid, u: FieldLike, q: float) -> float:
    """Quadrature of u^q.  Negative values are only allowed for even integer ``q``."""
    vals = values_of(grid, u)
    even = float(q).is_integer() and int(q) % 2 == 0
    if not even and np.any(vals < 0):
        raise DomainError(f"u^{q} needs u >= 0")
    return float(np.dot(grid.quad_weights, vals**q))


def grad_inner(grid: Grid, u: FieldLike, v: FieldLike) -> float:
    """Bilinear form sum_faces |face| * du * dv / h."""
    du = np.diff(values_of(grid, u))
    dv = np.diff(values_of(grid, v))
    return float(np.dot(grid.face_weights, du * dv) / grid.h)


def grad_norm_sq(grid: Grid, u: FieldLike) -> float:
    """Quadrature of |grad u|^2 from first differences at the cell midpoints."""
    return grad_inner(grid, u, u)
