"""Boundary-condition tables and face gradients on the cell grid."""
from __future__ import annotations

import numpy as np

from .kernels import COUPLED, DIRICHLET, OUTFLOW, ZERO_FLUX
from .mesh import N_FACE_KINDS, FaceKind, Grid


def bc_table(dirichlet=None, outflow=()):
    """Per-kind ``(bc_type, bc_value)`` arrays for :func:`kernels.scalar_coefficients`.

    Interior faces couple; kinds in ``dirichlet`` (a ``{kind: value}`` map)
    are fixed-value; kinds in ``outflow`` are zero-gradient outflow; the rest
    are zero-flux.
    """
    bc_type = np.full(N_FACE_KINDS, ZERO_FLUX, dtype=np.int64)
    bc_value = np.zeros(N_FACE_KINDS)
    bc_type[FaceKind.INTERIOR] = COUPLED
    for kind, value in (dirichlet or {}).items():
        bc_type[kind] = DIRICHLET
        bc_value[kind] = value
    for kind in outflow:
        bc_type[kind] = OUTFLOW
    return bc_type, bc_value


def face_gradients(values: np.ndarray, grid: Grid, dirichlet=None):
    """Normal derivatives of a cell field on x-faces and y-faces.

    Interior faces use the two-point difference; fixed-value faces use the
    half-cell distance to the boundary value; all other faces (walls,
    obstacle faces, zero-gradient outlets) carry zero normal derivative.
    """
    dirichlet = dirichlet or {}
    nx, ny, dx, dy = grid.nx, grid.ny, grid.dx, grid.dy
    gx = np.zeros((nx + 1, ny))
    gy = np.zeros((nx, ny + 1))
    interior = grid.xkind[1:-1] == FaceKind.INTERIOR
    gx[1:-1] = np.where(interior, (values[1:] - values[:-1]) / dx, 0.0)
    interior = grid.ykind[:, 1:-1] == FaceKind.INTERIOR
    gy[:, 1:-1] = np.where(interior, (values[:, 1:] - values[:, :-1]) / dy, 0.0)

    if dirichlet:
        side_x, side_y = fixed_face_sides(grid)
        for kind, vb in dirichlet.items():
            _fixed_faces(gx, grid.xkind == kind, side_x, values, vb, dx, axis=0)
            _fixed_faces(gy, grid.ykind == kind, side_y, values, vb, dy, axis=1)
    return gx, gy


def divergence(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    """Cell divergence of a face-normal vector field (zero in solid cells)."""
    div = (u[1:] - u[:-1]) / grid.dx + (v[:, 1:] - v[:, :-1]) / grid.dy
    return np.where(grid.fluid, div, 0.0)


def fixed_face_sides(grid: Grid):
    """Which side of each face holds fluid: +1 (the cell after), -1 (before), 0."""
    f = grid.fluid
    after_x = np.zeros((grid.nx + 1, grid.ny), dtype=bool)
    before_x = np.zeros_like(after_x)
    after_x[:-1] = f
    before_x[1:] = f
    after_y = np.zeros((grid.nx, grid.ny + 1), dtype=bool)
    before_y = np.zeros_like(after_y)
    after_y[:, :-1] = f
    before_y[:, 1:] = f
    sx = np.where(after_x & ~before_x, 1, np.where(before_x & ~after_x, -1, 0))
    sy = np.where(after_y & ~before_y, 1, np.where(before_y & ~after_y, -1, 0))
    return sx, sy


def _fixed_faces(g, mask, side, values, vb, h, axis):
    # fluid after the face: gradient (phi_P - vb)/(h/2); fluid before: (vb - phi_P)/(h/2)
    ii, jj = np.nonzero(mask & (side != 0))
    s = side[ii, jj]
    if axis == 0:
        ci = np.where(s > 0, ii, ii - 1)
        cj = jj
    else:
        ci = ii
        cj = np.where(s > 0, jj, jj - 1)
    g[ii, jj] = s * (values[ci, cj] - vb) / (0.5 * h)
