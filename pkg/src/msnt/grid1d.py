"""Cell-centered finite volumes on an interval.

Fields live either on the N cells or on the N+1 faces.  The gradient maps
cells to faces (zero at the two boundary faces, matching the no-flux walls)
and the divergence maps faces back to cells; together they telescope, so any
face flux that vanishes on the boundary conserves its cell integral exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid: N cells on an interval of the given length."""

    N: int
    length: float

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("grid needs at least one cell")
        if self.length <= 0:
            raise ValidationError("domain length must be positive")

    @property
    def dx(self):
        return self.length / self.N

    @property
    def cell_centers(self):
        return (np.arange(self.N) + 0.5) * self.dx

    @property
    def face_positions(self):
        return np.arange(self.N + 1) * self.dx


def _check_cells(grid, f):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != grid.N:
        raise ValidationError(f"cell field has length {f.shape[0]}, expected {grid.N}")
    return f


def _check_faces(grid, F):
    F = np.asarray(F, dtype=float)
    if F.shape[0] != grid.N + 1:
        raise ValidationError(f"face field has length {F.shape[0]}, expected {grid.N + 1}")
    return F


def face_gradient(grid, f):
    """Two-point face gradients of a cell field; boundary faces get 0."""
    f = _check_cells(grid, f)
    g = np.zeros((grid.N + 1,) + f.shape[1:])
    g[1:-1] = (f[1:] - f[:-1]) / grid.dx
    return g


def divergence(grid, F):
    """Cell divergence of a face field: (F_{k+1} - F_k)/dx."""
    F = _check_faces(grid, F)
    return (F[1:] - F[:-1]) / grid.dx


def face_average(cl, cr, mode="arithmetic"):
    """Face value from the two adjacent cell values."""
    if mode == "arithmetic":
        return 0.5 * (cl + cr)
    if mode == "harmonic":
        return 2.0 * cl * cr / (cl + cr)
    raise ValidationError(f"unknown face averaging mode {mode!r}")


def apply_boundary(params, theta_left, theta_right):
    """Robin boundary energy fluxes (signed along +x).

    Mass fluxes at the walls are zero; the energy flux relaxes the wall-cell
    temperature toward the background, so a cell hotter than theta0 loses
    energy: left face lambda (theta0 - theta), right face lambda (theta - theta0).
    """
    return (params.lam * (params.theta0 - theta_left),
            params.lam * (theta_right - params.theta0))


def restrict(fine, factor):
    """Average groups of ``factor`` fine cells into one coarse cell."""
    fine = np.asarray(fine, dtype=float)
    if fine.shape[0] % factor:
        raise ValidationError("fine cell count not divisible by restriction factor")
    shape = (fine.shape[0] // factor, factor) + fine.shape[1:]
    return fine.reshape(shape).mean(axis=1)


def prolong(coarse, factor):
    """Piecewise-constant refinement; restrict(prolong(f)) == f exactly."""
    return np.repeat(np.asarray(coarse, dtype=float), factor, axis=0)
