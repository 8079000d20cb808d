"""First Dirichlet eigenpair of the discrete -Delta by inverse power iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Field, Grid, _neg_laplacian_values, grad_norm_sq, l2_norm, mass
from .errors import ConvergenceError

__all__ = ["EigenPair", "first_eigenpair"]


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    phi1: Field
    iterations: int = 0

    def residual(self) -> float:
        phi = self.phi1.values
        grid = self.phi1.grid
        return l2_norm(grid, _neg_laplacian_values(grid, phi) - self.lambda1 * phi)


def first_eigenpair(
    grid: Grid,
    rtol: float = 1e-12,
    residual_tol: float = 1e-10,
    max_iter: int = 500,
) -> EigenPair:
    """Smallest eigenvalue of the discrete Dirichlet ``-Delta`` and its eigenfunction.

    Each step solves ``A x = y`` with a banded Cholesky factor of the
    stiffness matrix.  Iteration stops once successive Rayleigh quotients
    agree to ``rtol`` and the eigen-residual is below ``residual_tol * lambda1``.
    The eigenfunction is L2 normalized and signed so that its largest node is
    positive.
    """
    solve = grid.solver()
    free = grid.free
    w = grid.quad_weights[free]
    # the constant interior profile overlaps the ground state
    x = np.ones(free.size)
    x /= math.sqrt(np.dot(w, x * x))
    phi = np.zeros(grid.size)
    rq_old = math.inf
    for it in range(1, max_iter + 1):
        x = solve(x)
        x /= math.sqrt(np.dot(w, x * x))
        phi[free] = x
        rq = grad_norm_sq(grid, phi) / mass(grid, phi)
        res = l2_norm(grid, _neg_laplacian_values(grid, phi) - rq * phi)
        if abs(rq - rq_old) <= rtol * rq and res <= residual_tol * rq:
            break
        rq_old = rq
    else:
        raise ConvergenceError(
            f"inverse iteration did not converge in {max_iter} steps "
            f"(lambda ~ {rq:.12g}, residual {res:.3e})"
        )
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    phi = phi / math.sqrt(mass(grid, phi))
    return EigenPair(float(rq), Field(phi, grid), it)
